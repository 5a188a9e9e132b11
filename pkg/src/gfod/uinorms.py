"""Unitarily invariant norms of Hermitian matrices.

Norms are evaluated from singular values. Gradients are provided for the
Schatten family only (``p > 1``), where the norm is C^1 away from zero.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import linalg

KINDS = ("schatten", "fro", "spec", "kyfan", "kyfan+fro", "spec+fro")
_STRICT = {"schatten", "fro", "kyfan+fro", "spec+fro"}


@dataclass(frozen=True)
class UINormSpec:
    kind: str
    p: float | None = None
    h: int | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "schatten" and not (self.p is not None and self.p > 1):
            raise ValueError(f"Schatten-p needs p > 1, got {self.p!r}")
        if self.kind.startswith("kyfan") and not (self.h is not None and self.h >= 1):
            raise ValueError(f"Ky Fan norm needs h >= 1, got {self.h!r}")
        if self.kind.endswith("+fro") and not (self.eps is not None and self.eps > 0):
            raise ValueError(f"composite norm needs eps > 0, got {self.eps!r}")

    @property
    def strictly_convex(self) -> bool:
        return self.kind in _STRICT

    @property
    def smooth(self) -> bool:
        return self.kind in ("schatten", "fro")

    @property
    def exponent(self) -> float:
        if not self.smooth:
            raise ValueError(f"{self} has no Schatten exponent")
        return 2.0 if self.kind == "fro" else float(self.p)

    def __str__(self) -> str:
        return format_norm(self)


def schatten(p: float) -> UINormSpec:
    return UINormSpec("schatten", p=float(p))


FROBENIUS = UINormSpec("fro")
SPECTRAL = UINormSpec("spec")


def kyfan(h: int) -> UINormSpec:
    return UINormSpec("kyfan", h=int(h))


def kyfan_plus_fro(h: int, eps: float) -> UINormSpec:
    return UINormSpec("kyfan+fro", h=int(h), eps=float(eps))


def spectral_plus_fro(eps: float) -> UINormSpec:
    return UINormSpec("spec+fro", eps=float(eps))


_NUM = r"(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)"


def parse_norm(text: str) -> UINormSpec:
    """Parse compact forms: ``fro``, ``spec``, ``p1.5``, ``kyfan3``,
    ``kyfan3+fro0.01``, ``spec+fro1``."""
    t = text.strip().lower()
    if t == "fro":
        return FROBENIUS
    if t == "spec":
        return SPECTRAL
    if m := re.fullmatch(r"p" + _NUM, t):
        return schatten(float(m.group(1)))
    if m := re.fullmatch(r"kyfan(\d+)", t):
        return kyfan(int(m.group(1)))
    if m := re.fullmatch(r"kyfan(\d+)\+fro" + _NUM, t):
        return kyfan_plus_fro(int(m.group(1)), float(m.group(2)))
    if m := re.fullmatch(r"spec\+fro" + _NUM, t):
        return spectral_plus_fro(float(m.group(1)))
    raise ValueError(f"cannot parse norm {text!r}")


def format_norm(norm: UINormSpec) -> str:
    g = lambda x: format(x, "g")  # noqa: E731
    return {
        "fro": lambda: "fro",
        "spec": lambda: "spec",
        "schatten": lambda: f"p{g(norm.p)}",
        "kyfan": lambda: f"kyfan{norm.h}",
        "kyfan+fro": lambda: f"kyfan{norm.h}+fro{g(norm.eps)}",
        "spec+fro": lambda: f"spec+fro{g(norm.eps)}",
    }[norm.kind]()


def evaluate_spectrum(norm: UINormSpec, values) -> float:
    """Norm of ``diag(values)``; only ``|values|`` matter."""
    s = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]
    if s.size == 0:
        return 0.0
    top = s[0]
    fro = float(top * np.sqrt(np.sum((s / top) ** 2))) if top > 0 else 0.0
    kind = norm.kind
    if kind == "fro":
        return fro
    if kind == "schatten":
        if top == 0.0:
            return 0.0
        return float(top * np.sum((s / top) ** norm.p) ** (1.0 / norm.p))
    if kind == "spec":
        return float(s[0])
    if kind == "kyfan":
        return float(np.sum(s[: norm.h]))
    if kind == "kyfan+fro":
        return float(np.sum(s[: norm.h])) + norm.eps * fro
    if kind == "spec+fro":
        return float(s[0]) + norm.eps * fro
    raise AssertionError(kind)


def evaluate(norm: UINormSpec, A, method: str = "jacobi") -> float:
    """Norm of a Hermitian matrix via its singular values."""
    return evaluate_spectrum(norm, linalg.singular_values(A, method=method))


def gradient(norm: UINormSpec, A, method: str = "jacobi") -> np.ndarray:
    """Gradient of a Schatten-p norm at a nonzero Hermitian ``A``.

    Returns ``U diag(phi(lam)) U*`` with
    ``phi(x) = sign(x) |x|^(p-1) / ||A||_p^(p-1)``, the Riesz representer of
    the derivative for the real trace inner product.
    """
    if not norm.smooth:
        raise ValueError(f"gradient available for Schatten/Frobenius norms only, not {norm}")
    eig = linalg.herm_eig(A, method=method)
    lam = eig.values
    if not np.any(lam != 0.0):
        raise ValueError("norm gradient is undefined at the zero matrix")
    p = norm.exponent
    top = np.max(np.abs(lam))
    x = lam / top
    nrm = np.sum(np.abs(x) ** p) ** (1.0 / p)
    phi = np.sign(x) * np.abs(x) ** (p - 1) / nrm ** (p - 1)
    U = eig.vectors
    return (U * phi) @ U.conj().T
