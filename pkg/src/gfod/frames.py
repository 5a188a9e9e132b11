"""Frame families with prescribed squared norms.

``schur_horn_synthesize`` builds a family whose frame operator is
``diag(mu)`` and whose squared norms are ``a``; ``construct_minimizer``
uses it block by block to realize an optimal family for ``N(S - S_G)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core, linalg, vecmaj

NORM_RTOL = 1e-10


class SynthesisError(ValueError):
    pass


@dataclass(frozen=True)
class FrameFamily:
    """``vectors[i]`` is ``g_i`` (shape ``(k, d)``); ``norms_sq[i] == ||g_i||^2``."""

    vectors: np.ndarray
    norms_sq: np.ndarray

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        a = np.asarray(self.norms_sq, dtype=float)
        if G.shape[0] < 1 or G.shape[0] != a.size:
            raise ValueError(f"{G.shape[0]} vectors but {a.size} norms")
        got = np.sum(np.abs(G) ** 2, axis=1)
        if np.any(np.abs(got - a) > NORM_RTOL * np.maximum(a, 1.0)):
            raise ValueError("vector norms do not match norms_sq")
        object.__setattr__(self, "vectors", G)
        object.__setattr__(self, "norms_sq", a)

    @classmethod
    def from_vectors(cls, vectors) -> "FrameFamily":
        G = np.atleast_2d(np.asarray(vectors, dtype=complex))
        return cls(G, np.sum(np.abs(G) ** 2, axis=1))

    @property
    def k(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def frame_operator(self) -> np.ndarray:
        return linalg.rank_one_sum(self.vectors)


def frame_operator(fam: FrameFamily) -> np.ndarray:
    return fam.frame_operator()


@dataclass(frozen=True)
class SynthesisResult:
    family: FrameFamily
    achieved_spectrum: np.ndarray
    frame_operator: np.ndarray


def _schur_horn_gram(spec: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Orthogonal ``Q`` with ``diag(Q diag(spec) Q^T) == targets``.

    Targets are placed in decreasing order. Each step rotates two uncoupled
    active diagonal entries ``x >= t > y`` (adjacent in sorted order) so
    that one becomes exactly ``t``; the other stays active with value
    ``x + y - t``. The remaining active values keep majorizing the
    remaining targets, so at most ``n - 1`` rotations are used.
    """
    n = spec.size
    Q = np.eye(n)
    diag = spec.astype(float).copy()
    active = list(range(n))
    slot_of = np.empty(n, dtype=int)
    for t_idx in np.argsort(-targets, kind="stable"):
        t = targets[t_idx]
        if len(active) == 1:
            slot_of[t_idx] = active.pop()
            continue
        vals = diag[active]
        scale = 1e-14 * (1.0 + abs(t))
        close = int(np.argmin(np.abs(vals - t)))
        below = np.flatnonzero(vals < t)
        above = np.flatnonzero(vals >= t)
        if abs(vals[close] - t) <= scale or not below.size or not above.size:
            # already on target (up to rounding): no rotation needed
            slot_of[t_idx] = active.pop(close)
            continue
        yj = below[np.argmax(vals[below])]
        xj = above[np.argmin(vals[above])]
        p, q = active[xj], active[yj]
        x, y = diag[p], diag[q]
        cos2 = min(max((t - y) / (x - y), 0.0), 1.0)
        c, s = np.sqrt(cos2), np.sqrt(1.0 - cos2)
        R = np.eye(n)
        R[p, p], R[p, q], R[q, p], R[q, q] = c, -s, s, c
        Q = R @ Q
        diag[p], diag[q] = t, x + y - t
        slot_of[t_idx] = p
        active.remove(p)
    # row slot_of[i] of Q carries target i
    return Q[slot_of, :]


def schur_horn_synthesize(mu, a) -> SynthesisResult:
    """Family with squared norms ``a`` and frame operator ``diag(mu)``.

    Parameters
    ----------
    mu : array_like, length d
        Non-increasing, non-negative target spectrum; with ``k < d`` at
        most ``k`` entries may be nonzero.
    a : array_like, length k
        Positive squared norms with ``a ≺ mu``.
    """
    mu = np.asarray(mu, dtype=float)
    a = np.asarray(a, dtype=float)
    d, k = mu.size, a.size
    if np.any(np.diff(mu) > 1e-12 * (1 + abs(mu).max())) or mu.min() < -1e-12:
        raise SynthesisError("mu must be non-increasing and non-negative")
    if np.any(a <= 0):
        raise SynthesisError("norms must be positive")
    tol = 1e-9 * (1.0 + max(mu.max(), a.max()))
    if abs(a.sum() - mu.sum()) > tol:
        raise SynthesisError(f"trace mismatch: sum(a)={a.sum()!r} but sum(mu)={mu.sum()!r}")
    bad = vecmaj.first_failure(a, mu, tol=tol)
    if bad is not None:
        gap = vecmaj.partial_sum_gaps(a, mu)[bad - 1]
        raise SynthesisError(f"a is not majorized by mu: partial sum {bad} falls short by {-gap:.3e}")
    mu = np.maximum(mu, 0.0)
    spec = np.zeros(k)
    spec[: min(k, d)] = mu[: min(k, d)]
    Q = _schur_horn_gram(spec, a)
    # Gram matrix Q diag(spec) Q^T; synthesis matrix diag(sqrt(spec)) Q^T
    T = np.sqrt(spec)[:, None] * Q.T
    G = np.zeros((k, d), dtype=complex)
    m = min(k, d)
    G[:, :m] = T[:m, :].T
    # rounding in the leftover slot is at the 1e-15 level; pin norms exactly
    G *= np.sqrt(a / np.sum(np.abs(G) ** 2, axis=1))[:, None]
    fam = FrameFamily(G, a)
    S = fam.frame_operator()
    return SynthesisResult(fam, linalg.eigvalsh_desc(S), S)


def construct_minimizer(S, a, sol: core.DeltaSolution | None = None) -> SynthesisResult:
    """An explicit global minimizer of ``N(S - S_G)`` over families with norms ``a``.

    Vectors ``s_{j-1}+1..s_j`` are synthesized inside eigenspace block ``j``
    of ``S`` (constant ``c_j``); the trailing vectors fill the water-level
    block. The result is rotated back through the eigenvectors of ``S``.
    """
    eig = linalg.herm_eig(S)
    lam = eig.values
    scale = 1e-10 * (1.0 + abs(lam).max())
    if lam[-1] < -scale:
        raise core.InstanceError(f"S is not positive semidefinite (min eigenvalue {lam[-1]:.3e})")
    lam = np.maximum(lam, 0.0)
    inst = core.GfodInstance.create(lam, a)
    if sol is None:
        sol = core.delta(inst)
    a_sorted = inst.a
    k, d = inst.k, inst.d
    m = inst.m
    Gs = np.zeros((k, d), dtype=complex)
    s, c = sol.s, sol.c
    r = s[-2]
    head_lam = inst.lam[:m]
    for j in range(len(c) - 1):
        lo, hi = s[j], s[j + 1]
        block_mu = head_lam[lo:hi] - c[j]
        res = schur_horn_synthesize(block_mu, a_sorted[lo:hi])
        Gs[lo:hi, lo:hi] = res.family.vectors
    tail_mu = np.maximum(head_lam[r:] - c[-1], 0.0)
    res = schur_horn_synthesize(tail_mu, a_sorted[r:])
    Gs[r:, r:m] = res.family.vectors
    G = np.empty_like(Gs)
    G[inst.a_perm] = Gs @ eig.vectors.T
    fam = FrameFamily(G, np.asarray(a, dtype=float))
    SG = fam.frame_operator()
    return SynthesisResult(fam, linalg.eigvalsh_desc(SG), SG)
