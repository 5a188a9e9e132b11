"""Optimal residual spectra for frame operator distance problems.

Given a target spectrum ``lam`` (length d) and squared norms ``a`` (length k)
this module computes the vector ``delta(lam, a)`` whose non-increasing
rearrangement is the spectrum of ``S - S_G`` at every local (hence global)
minimizer ``G``. The computation is:

* find the smallest index ``r`` such that the tail pair
  ``(lam[r:], a[r:])`` admits a water level ``c`` with
  ``a[r:] ≺ (lam[r:] - c)^+`` (a *co-feasible* index);
* split the head ``1..r`` into blocks by repeatedly taking the rightmost
  minimizer of running averages of ``h_i = lam_i - a_i``;
* glue head block constants and the clipped tail ``min(lam_i, c)``.

For ``k < d`` the problem is solved on the first ``k`` eigenvalues and the
remaining eigenvalues are appended unchanged.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import vecmaj

TIE_TOL = 1e-12
STRICT_TOL = 1e-12
COFEAS_TOL = 1e-9


class InstanceError(ValueError):
    """Problem data violating the instance invariants."""


class SolverError(RuntimeError):
    """No co-feasible index or a broken theoretical guarantee."""


class DegenerateInstanceWarning(UserWarning):
    pass


def _hybrid(tol: float, *arrays) -> float:
    scale = max((float(np.max(np.abs(x), initial=0.0)) for x in arrays), default=0.0)
    return tol * (1.0 + scale)


@dataclass(frozen=True)
class GfodInstance:
    """Sorted problem data.

    ``lam_perm`` and ``a_perm`` map sorted positions back to the caller's
    order: ``lam == raw_lam[lam_perm]``.
    """

    lam: np.ndarray
    a: np.ndarray
    lam_perm: np.ndarray = None
    a_perm: np.ndarray = None

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        a = np.asarray(self.a, dtype=float)
        if lam.ndim != 1 or a.ndim != 1 or lam.size < 1 or a.size < 1:
            raise InstanceError("lambda and a must be non-empty 1-d lists")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(a))):
            raise InstanceError("non-finite entries in problem data")
        if np.any(np.diff(lam) > 0) or np.any(np.diff(a) > 0):
            raise InstanceError("lambda and a must be non-increasing (use GfodInstance.create)")
        if lam[-1] < 0:
            raise InstanceError(f"lambda must be non-negative, got {float(lam[-1])!r}")
        if a[-1] <= 0:
            raise InstanceError(f"a must be strictly positive, got {float(a[-1])!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "a", a)
        if self.lam_perm is None:
            object.__setattr__(self, "lam_perm", np.arange(lam.size))
        if self.a_perm is None:
            object.__setattr__(self, "a_perm", np.arange(a.size))

    @classmethod
    def create(cls, lam, a) -> "GfodInstance":
        """Build an instance from unsorted data, recording the sort permutations."""
        lam = np.asarray(lam, dtype=float).ravel()
        a = np.asarray(a, dtype=float).ravel()
        lp = np.argsort(-lam, kind="stable")
        ap = np.argsort(-a, kind="stable")
        return cls(lam[lp], a[ap], lp, ap)

    @property
    def d(self) -> int:
        return self.lam.size

    @property
    def k(self) -> int:
        return self.a.size

    @property
    def m(self) -> int:
        return min(self.k, self.d)


@dataclass(frozen=True)
class AveragingTable:
    h: np.ndarray
    prefix: np.ndarray

    def P(self, j: int, r: int) -> float:
        """Average of ``h_j..h_r`` (1-based, inclusive)."""
        m = self.h.size
        if not (1 <= j <= r <= m):
            raise IndexError(f"average P({j}, {r}) out of range for m={m}")
        return float((self.prefix[r] - self.prefix[j - 1]) / (r - j + 1))


def averages(inst: GfodInstance) -> AveragingTable:
    m = inst.m
    h = inst.lam[:m] - inst.a[:m]
    return AveragingTable(h=h, prefix=np.concatenate(([0.0], np.cumsum(h))))


def waterfill_c(lam_tail, total: float) -> float:
    """Unique ``c < lam_tail[0]`` with ``sum((lam_tail - c)^+) == total``.

    Solved exactly on the piecewise-linear water-fill function: on the piece
    where the first ``n`` entries are active, ``c = (sum(lam[:n]) - total) / n``.
    """
    lam = np.asarray(lam_tail, dtype=float)
    if lam.size == 0:
        raise ValueError("empty spectrum tail")
    if not total > 0:
        raise ValueError(f"water-fill total must be positive, got {total!r}")
    run = 0.0
    for n in range(1, lam.size + 1):
        run += lam[n - 1]
        c = (run - total) / n
        if n == lam.size or c >= lam[n]:
            return float(c)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class CoFeasibility:
    r: int
    c: float
    cofeasible: bool
    truncated_mu: np.ndarray


def check_cofeasible(inst: GfodInstance, r: int) -> CoFeasibility:
    """Test whether ``(lam[r:], a[r:])`` is a co-feasible pair."""
    if not (0 <= r <= inst.d - 1 and r < inst.k):
        raise IndexError(f"index r={r} out of range for d={inst.d}, k={inst.k}")
    tail = inst.lam[r:]
    a_tail = inst.a[r:]
    c = waterfill_c(tail, float(a_tail.sum()))
    mu = np.maximum(tail - c, 0.0)
    tol = _hybrid(COFEAS_TOL, inst.lam, inst.a)
    ok = bool(c < tail[0]) and vecmaj.majorizes(a_tail, mu, tol=tol)
    return CoFeasibility(r=r, c=c, cofeasible=ok, truncated_mu=mu)


def _rightmost_argmin(values: list[float]) -> int:
    vmin = min(values)
    tol = TIE_TOL * (1.0 + abs(vmin))
    return max(i for i, v in enumerate(values) if v <= vmin + tol)


def block_structure(inst: GfodInstance, r: int) -> tuple[list[int], list[float]]:
    """Head block ends ``s_1 < ... < s_{q-1} = r`` and their constants.

    Each block starts right after the previous end ``s`` and ends at the
    rightmost minimizer of ``P(s + 1, l)`` over ``s < l <= r``.
    """
    if not (0 <= r <= inst.m - 1):
        raise IndexError(f"index r={r} out of range for min(k, d)={inst.m}")
    table = averages(inst)
    ends: list[int] = []
    consts: list[float] = []
    s = 0
    while s < r:
        vals = [table.P(s + 1, l) for l in range(s + 1, r + 1)]
        end = s + 1 + _rightmost_argmin(vals)
        ends.append(end)
        consts.append(table.P(s + 1, end))
        s = end
    return ends, consts


def _admissible_margin(inst: GfodInstance, r: int, cof: CoFeasibility) -> float:
    if r == 0:
        return np.inf
    _, consts = block_structure(inst, r)
    return cof.c - consts[-1]


def is_admissible(inst: GfodInstance, r: int, cof: CoFeasibility | None = None) -> bool:
    """``r == 0`` or the last head constant sits strictly below the water level.

    Strictness is measured with a relative tolerance of 1e-12: a margin
    inside the tolerance counts as a tie, i.e. not admissible.
    """
    cof = check_cofeasible(inst, r) if cof is None else cof
    if not cof.cofeasible:
        raise ValueError(f"index r={r} is not co-feasible")
    return _admissible_margin(inst, r, cof) > STRICT_TOL * (1.0 + abs(cof.c))


def cofeasible_indices(inst: GfodInstance) -> list[int]:
    return [r for r in range(inst.d) if r < inst.k and check_cofeasible(inst, r).cofeasible]


def minimal_cofeasible_index(inst: GfodInstance, exhaustive: bool = False) -> int:
    """Smallest co-feasible index; it is the unique admissible one.

    With ``exhaustive=True`` every index is scanned and uniqueness of the
    co-feasible admissible index is asserted.
    """
    if inst.k < inst.d:
        raise InstanceError("minimal_cofeasible_index needs k >= d; reduce the instance first")
    r_min = None
    for r in range(inst.d):
        if check_cofeasible(inst, r).cofeasible:
            r_min = r
            break
    if r_min is None:
        raise SolverError(f"no co-feasible index for lambda={inst.lam.tolist()}, a={inst.a.tolist()}")
    cof = check_cofeasible(inst, r_min)
    if not is_admissible(inst, r_min, cof):
        margin = _admissible_margin(inst, r_min, cof)
        if margin < -STRICT_TOL * (1.0 + abs(cof.c)):
            raise SolverError(f"minimal co-feasible index r={r_min} is not admissible (margin {margin:.3e})")
        warnings.warn(
            f"degenerate instance: admissibility margin {margin:.3e} at r={r_min} is below tolerance",
            DegenerateInstanceWarning,
            stacklevel=2,
        )
    if exhaustive:
        good = [r for r in cofeasible_indices(inst) if is_admissible(inst, r)]
        if good and good != [r_min]:
            raise SolverError(f"co-feasible admissible indices {good}, expected exactly [{r_min}]")
    return r_min


def reduce_to_k(inst: GfodInstance) -> tuple[GfodInstance, np.ndarray]:
    """Keep the top ``k`` eigenvalues; return the reduced instance and the dropped tail."""
    if inst.k >= inst.d:
        raise InstanceError(f"reduction needs k < d (k={inst.k}, d={inst.d})")
    return GfodInstance(inst.lam[: inst.k], inst.a), inst.lam[inst.k :].copy()


def delta_at_index(inst: GfodInstance, r: int) -> tuple[list[int], list[float], np.ndarray]:
    """Block ends ``s_0..s_q``, constants ``c_1..c_q`` and delta for a co-feasible ``r``."""
    cof = check_cofeasible(inst, r)
    if not cof.cofeasible:
        raise ValueError(f"index r={r} is not co-feasible")
    ends, consts = block_structure(inst, r)
    cq = cof.c
    s_q = int(np.max(np.flatnonzero(inst.lam - cq > 0))) + 1
    s = [0] + ends + [s_q]
    c = consts + [cq]
    head = np.repeat(consts, np.diff([0] + ends)) if ends else np.empty(0)
    delta = np.concatenate([head, np.minimum(inst.lam[r:], cq)])
    return s, c, delta


@dataclass(frozen=True)
class DeltaSolution:
    """Solved block structure for one instance (always in sorted order).

    ``s`` holds ``s_0 = 0 < s_1 < ... < s_q`` and ``c`` holds ``c_1..c_q``;
    both refer to the reduced instance when ``kd_mode == "k<d"``.
    """

    instance: GfodInstance
    r_star: int
    s: list[int]
    c: list[float]
    delta: np.ndarray
    mu: np.ndarray
    kd_mode: str
    tail: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def q(self) -> int:
        return len(self.c)

    @property
    def delta_sorted(self) -> np.ndarray:
        return vecmaj.sort_down(self.delta)

    def block_of_vector(self, i: int) -> int:
        """0-based block number of the 0-based vector index ``i``."""
        r = self.s[-2]
        if i >= r:
            return self.q - 1
        return int(np.searchsorted(self.s[1:], i, side="right"))

    def invariants(self) -> dict[str, tuple[bool, float]]:
        """Measured residual and pass flag of each structural invariant."""
        inst = self.instance
        tol = _hybrid(COFEAS_TOL, inst.lam, inst.a)
        out: dict[str, tuple[bool, float]] = {}
        tr = abs(self.delta.sum() - (inst.lam.sum() - inst.a.sum()))
        out["trace_identity"] = (tr <= tol, float(tr))
        gaps = np.diff(self.c)
        gap = float(gaps.min()) if gaps.size else np.inf
        out["constants_increasing"] = (bool(gap > 0), gap)
        head = self.delta[: inst.m]
        bound = np.minimum(self.c[-1], inst.lam[: inst.m])
        excess = float(np.max(head - bound))
        out["delta_bound"] = (excess <= tol, excess)
        maj = vecmaj.partial_sum_gaps(inst.a, self.mu)
        tot = abs(inst.a.sum() - self.mu.sum())
        worst = min(float(maj.min()), -tot)
        out["a_majorized_by_mu"] = (vecmaj.majorizes(inst.a, self.mu, tol=tol), worst)
        neg = float(self.mu.min())
        tail_mu = float(np.max(np.abs(self.mu[inst.k :]), initial=0.0))
        out["mu_feasible"] = (neg >= -tol and tail_mu <= tol, min(neg, -tail_mu))
        return out


def _solve_square(inst: GfodInstance, exhaustive: bool) -> tuple[int, list[int], list[float], np.ndarray]:
    r = minimal_cofeasible_index(inst, exhaustive=exhaustive)
    s, c, d = delta_at_index(inst, r)
    return r, s, c, d


def delta(inst: GfodInstance, exhaustive: bool = False) -> DeltaSolution:
    """Optimal (unordered) residual spectrum ``delta(lam, a)`` and its blocks."""
    if inst.k < inst.d:
        reduced, tail = reduce_to_k(inst)
        r, s, c, dk = _solve_square(reduced, exhaustive)
        dvec = np.concatenate([dk, tail])
        mode = "k<d"
    else:
        tail = np.empty(0)
        r, s, c, dvec = _solve_square(inst, exhaustive)
        mode = "k>=d"
    mu = inst.lam - dvec
    tol = _hybrid(COFEAS_TOL, inst.lam, inst.a)
    mu = np.where((mu < 0) & (mu >= -tol), 0.0, mu)
    sol = DeltaSolution(inst, r, s, c, dvec, mu, mode, tail)
    failed = [name for name, (ok, _) in sol.invariants().items() if not ok]
    if failed:
        raise SolverError(f"solution violates invariants {failed}")
    return sol


def solve(lam, a, exhaustive: bool = False) -> DeltaSolution:
    """Convenience wrapper accepting unsorted data."""
    return delta(GfodInstance.create(lam, a), exhaustive=exhaustive)


def global_min_value(inst: GfodInstance, norm) -> float:
    """Minimal value of ``N(S - S_G)``: the norm of ``diag(delta)``."""
    from . import uinorms

    return uinorms.evaluate_spectrum(norm, delta(inst).delta)
