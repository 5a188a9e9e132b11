"""Command-line front end: ``gfod solve|synthesize|verify|check``.

Problems are JSON objects with ``a`` and exactly one of ``lambda`` (a
spectrum) or ``S`` (a Hermitian matrix, rows of numbers or ``[re, im]``
pairs). Output is JSON with floats written to 17 significant digits.
Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import core, descent, frames, linalg, uinorms

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
HERMITIAN_TOL = 1e-9


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- JSON output


def _num(x: float):
    x = float(x)
    if not math.isfinite(x):
        return None
    return x


def to_jsonable(obj):
    """Plain containers, with complex entries as ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text; floats use ``%.17g``."""
    def enc(v, ind):
        pad, inner = "  " * ind, "  " * (ind + 1)
        if isinstance(v, dict):
            if not v:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {enc(x, ind + 1)}" for k, x in v.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(v, list):
            if not v:
                return "[]"
            if all(not isinstance(x, (list, dict)) for x in v):
                return "[" + ", ".join(enc(x, ind) for x in v) + "]"
            return "[\n" + ",\n".join(inner + enc(x, ind + 1) for x in v) + "\n" + pad + "]"
        if isinstance(v, float):
            text = format(v, ".17g")
            return text if any(ch in text for ch in ".en") else text + ".0"
        return json.dumps(v)

    return enc(to_jsonable(obj), 0) + "\n"


# ----------------------------------------------------------------- JSON input


@dataclass
class Problem:
    a: np.ndarray
    lam: np.ndarray | None = None
    S: np.ndarray | None = None

    def spectrum(self) -> np.ndarray:
        return self.lam if self.S is None else linalg.eigvalsh_desc(self.S)

    def matrix(self) -> np.ndarray:
        return np.diag(self.lam).astype(complex) if self.S is None else self.S


def _real_list(v, name: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise InputError(f"'{name}' must be a non-empty list of numbers")
    try:
        out = np.array([float(x) for x in v])
    except (TypeError, ValueError):
        raise InputError(f"'{name}' must contain only numbers") from None
    if not np.all(np.isfinite(out)):
        raise InputError(f"'{name}' contains non-finite values")
    return out


def _entry(x) -> complex:
    if isinstance(x, bool):
        raise InputError("matrix entries must be numbers or [re, im] pairs")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
        return complex(x[0], x[1])
    raise InputError("matrix entries must be numbers or [re, im] pairs")


def parse_matrix(rows, name: str = "S") -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputError(f"'{name}' must be a non-empty list of rows")
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise InputError(f"'{name}' must be square")
    M = np.array([[_entry(x) for x in r] for r in rows], dtype=complex)
    if not np.all(np.isfinite(M)):
        raise InputError(f"'{name}' contains non-finite values")
    return M


def parse_problem(data) -> Problem:
    if not isinstance(data, dict):
        raise InputError("problem must be a JSON object")
    if "a" not in data:
        raise InputError("missing 'a'")
    has_lam, has_S = "lambda" in data, "S" in data
    if has_lam == has_S:
        raise InputError("exactly one of 'lambda' and 'S' must be given")
    a = _real_list(data["a"], "a")
    if has_lam:
        prob = Problem(a=a, lam=_real_list(data["lambda"], "lambda"))
    else:
        S = parse_matrix(data["S"])
        if np.max(np.abs(S - S.conj().T)) > HERMITIAN_TOL * (1.0 + np.max(np.abs(S))):
            raise InputError("'S' is not Hermitian within 1e-9")
        prob = Problem(a=a, S=0.5 * (S + S.conj().T))
    lam = prob.spectrum()
    if has_S and lam[-1] < 0 and lam[-1] >= -1e-12 * (1.0 + abs(lam[0])):
        lam = np.maximum(lam, 0.0)
    try:
        core.GfodInstance.create(lam, a)
    except core.InstanceError as exc:
        raise InputError(str(exc)) from None
    return prob


def read_problem(path: str) -> Problem:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    return parse_problem(data)


def parse_norms(text: str, smooth_only: bool = False) -> list[uinorms.UINormSpec]:
    out = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        try:
            norm = uinorms.parse_norm(item)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        if smooth_only and not norm.smooth:
            raise InputError(f"norm {item!r} has no gradient; use fro or pX with X > 1")
        out.append(norm)
    if not out:
        raise InputError("empty norm list")
    return out


# ------------------------------------------------------------------- commands


def _instance(prob: Problem) -> core.GfodInstance:
    lam = prob.spectrum()
    if prob.S is not None:
        lam = np.maximum(lam, 0.0) if lam[-1] >= -1e-12 * (1.0 + abs(lam[0])) else lam
    return core.GfodInstance.create(lam, prob.a)


def _perm(inst: core.GfodInstance) -> dict:
    return {"lambda": inst.lam_perm, "a": inst.a_perm}


def cmd_solve(prob: Problem, norms, exhaustive: bool = False) -> dict:
    inst = _instance(prob)
    sol = core.delta(inst, exhaustive=exhaustive)
    return {
        "r_star": sol.r_star,
        "kd_mode": sol.kd_mode,
        "blocks": {"s": sol.s, "c": sol.c},
        "delta": sol.delta,
        "delta_sorted": sol.delta_sorted,
        "mu": sol.mu,
        "global_min": {str(n): uinorms.evaluate_spectrum(n, sol.delta) for n in norms},
        "permutation": _perm(inst),
        "invariants": {k: {"ok": ok, "residual": r} for k, (ok, r) in sol.invariants().items()},
    }


def cmd_synthesize(prob: Problem) -> dict:
    S = prob.matrix()
    inst = _instance(prob)
    sol = core.delta(inst)
    res = frames.construct_minimizer(S, prob.a, sol)
    G = res.family.vectors
    X = S - linalg.rank_one_sum(G)
    spec = linalg.eigvalsh_desc(X)
    rep = descent.structure_report(G, S)
    spectrum_err = float(np.max(np.abs(spec - sol.delta_sorted)))
    norm_err = float(np.max(np.abs(np.sum(np.abs(G) ** 2, axis=1) - prob.a)))
    resid = float(rep.residuals.max())
    return {
        "vectors": G,
        "norms_sq": prob.a,
        "achieved_spectrum": spec,
        "target_spectrum": sol.delta_sorted,
        "certificate": {
            "ok": bool(spectrum_err <= 1e-8 and norm_err <= 1e-10 and resid <= 1e-7),
            "spectrum_error": spectrum_err,
            "norm_error": norm_err,
            "eigen_residuals": rep.residuals,
            "blocks_consecutive": rep.consecutive,
        },
        "permutation": _perm(inst),
    }


def _trial(args):
    S, a, norm_text, seed = args
    cfg = descent.DescentConfig(norm=uinorms.parse_norm(norm_text), seed=seed)
    return descent.descend(S, a, cfg)


def cmd_verify(prob: Problem, norms, trials: int, seed: int, jobs: int | None = None) -> dict:
    S = prob.matrix()
    inst = _instance(prob)
    target = core.delta(inst).delta_sorted
    tasks = [(S, prob.a, str(n), seed + t) for n in norms for t in range(trials)]
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            reports = list(pool.map(_trial, tasks))
    else:
        reports = [_trial(t) for t in tasks]
    rows = []
    for rep in reports:
        rows.append({
            "norm": rep.norm,
            "seed": rep.seed,
            "final_objective": rep.final_objective,
            "final_spectrum": rep.final_spectrum,
            "iterations": rep.iterations,
            "grad_norm": rep.grad_norm,
            "converged": rep.converged,
            "stop_reason": rep.stop_reason,
            "spectrum_deviation": float(np.max(np.abs(rep.final_spectrum - target))),
            "final_family": rep.final_family.vectors,
        })
    agg = {"target_spectrum": target, "trials": len(rows),
           "converged": sum(r["converged"] for r in rows),
           "max_spectrum_deviation": None, "max_cross_norm_deviation": None}
    if rows:
        agg["max_spectrum_deviation"] = max(r["spectrum_deviation"] for r in rows)
        cross = 0.0
        for i, ri in enumerate(reports):
            for rj in reports[i + 1:]:
                if ri.norm != rj.norm:
                    cross = max(cross, float(np.max(np.abs(ri.final_spectrum - rj.final_spectrum))))
        agg["max_cross_norm_deviation"] = cross
    return {"aggregate": agg, "trials": rows, "permutation": _perm(inst)}


def cmd_check(prob: Problem, index: int) -> dict:
    inst = _instance(prob)
    if not 0 <= index < inst.d:
        raise InputError(f"--index must satisfy 0 <= r < d = {inst.d}")
    work = inst
    if inst.k < inst.d:
        work, _ = core.reduce_to_k(inst)
        if index >= work.d:
            raise InputError(f"--index must be below k = {inst.k} when k < d")
    cof = core.check_cofeasible(work, index)
    return {
        "index": index,
        "cofeasible": cof.cofeasible,
        "admissible": core.is_admissible(work, index, cof) if cof.cofeasible else False,
        "c": cof.c,
        "truncated_mu": cof.truncated_mu,
        "permutation": _perm(inst),
    }


# ------------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gfod", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("problem", help="problem JSON file, or - for stdin")
        p.add_argument("--out", help="write JSON here instead of stdout")
        return p

    p = add("solve", "closed-form optimal residual spectrum")
    p.add_argument("--norms", default="fro", help="comma list, e.g. fro,p3,spec,kyfan2")
    p.add_argument("--debug-exhaustive", action="store_true",
                   help="scan all indices and assert a unique admissible one")
    add("synthesize", "explicit optimal family with certificate")
    p = add("verify", "multi-start descent against the closed form")
    p.add_argument("--norms", default="fro", help="comma list of fro / pX (X > 1)")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")
    p = add("check", "co-feasibility and admissibility of one index")
    p.add_argument("--index", type=int, required=True)
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        prob = read_problem(args.problem)
        if args.command == "solve":
            out = cmd_solve(prob, parse_norms(args.norms), args.debug_exhaustive)
        elif args.command == "synthesize":
            out = cmd_synthesize(prob)
        elif args.command == "verify":
            if args.trials < 0 or args.seed < 0 or (args.jobs is not None and args.jobs < 1):
                raise InputError("--trials and --seed must be >= 0, --jobs >= 1")
            out = cmd_verify(prob, parse_norms(args.norms, smooth_only=True),
                             args.trials, args.seed, args.jobs)
        else:
            out = cmd_check(prob, args.index)
    except (InputError, core.InstanceError, frames.SynthesisError) as exc:
        print(f"gfod: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (core.SolverError, linalg.ConvergenceError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"gfod: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = dumps(out)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
