"""Riemannian descent for ``Theta(G) = N(S - S_G)`` on a product of spheres.

Used as an empirical check of the closed-form optimum: every local
minimizer reached from random starts should have residual spectrum
``sort_down(delta(lam(S), a))``, independently of the Schatten exponent.
Also holds structure diagnostics for critical points and the two explicit
objective-decreasing curves that rule out misordered blocks.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg, uinorms
from .frames import FrameFamily, SynthesisResult

EIG = "lapack"


@dataclass(frozen=True)
class DescentConfig:
    norm: uinorms.UINormSpec = uinorms.FROBENIUS
    max_iters: int = 5000
    step_init: float = 1.0
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    grad_tol: float = 1e-8
    seed: int = 0
    # stop once the objective drops by less than stall_rtol over stall_window steps
    stall_window: int = 100
    stall_rtol: float = 1e-13

    def __post_init__(self):
        if not self.norm.smooth:
            raise ValueError(f"descent needs a Schatten-p or Frobenius norm, got {self.norm}")
        if (self.max_iters < 0 or self.step_init <= 0 or self.grad_tol <= 0
                or self.stall_window < 1 or self.stall_rtol < 0):
            raise ValueError("budgets, step and tolerance must be positive")
        if not (0 < self.armijo_c < 1 and 0 < self.armijo_shrink < 1):
            raise ValueError("Armijo constants must lie in (0, 1)")


@dataclass
class DescentReport:
    final_family: FrameFamily
    final_objective: float
    final_spectrum: np.ndarray
    iterations: int
    grad_norm: float
    converged: bool
    stop_reason: str = ""
    seed: int = 0
    norm: str = ""
    history: list[float] = field(default_factory=list, repr=False)


def _rows(G) -> np.ndarray:
    if isinstance(G, SynthesisResult):
        G = G.family
    if isinstance(G, FrameFamily):
        return G.vectors
    return np.atleast_2d(np.asarray(G, dtype=complex))


def residual(G, S) -> np.ndarray:
    return np.asarray(S, dtype=complex) - linalg.rank_one_sum(_rows(G))


def objective(G, S, norm: uinorms.UINormSpec, method: str = EIG) -> float:
    """``N(S - S_G)``."""
    return uinorms.evaluate(norm, residual(G, S), method=method)


def euclidean_gradient(G, S, norm: uinorms.UINormSpec, method: str = EIG) -> np.ndarray:
    """Rows ``-2 grad N(S - S_G) g_i`` (gradient for the real inner product
    ``Re <u, v>`` on ``(C^d)^k``); zero at an exact fit."""
    V = _rows(G)
    X = residual(V, S)
    if not np.any(np.abs(X) > 0):
        return np.zeros_like(V)
    D = uinorms.gradient(norm, X, method=method)
    return -2.0 * V @ D.T


def project_tangent(G, E) -> np.ndarray:
    """Remove the radial component of ``E[i]`` along ``G[i]``."""
    V = _rows(G)
    radial = np.real(np.sum(V.conj() * E, axis=1)) / np.sum(np.abs(V) ** 2, axis=1)
    return E - radial[:, None] * V


def retract(V: np.ndarray, norms_sq: np.ndarray) -> np.ndarray:
    return V * (np.sqrt(norms_sq) / np.linalg.norm(V, axis=1))[:, None]


def random_family(a, d: int, rng: np.random.Generator) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    Z = rng.standard_normal((a.size, d)) + 1j * rng.standard_normal((a.size, d))
    return retract(Z, a)


def _inner(X, Y) -> float:
    return float(np.real(np.vdot(X, Y)))


def descend(S, a, config: DescentConfig = DescentConfig(), start=None) -> DescentReport:
    """Projected (Riemannian) gradient descent with Armijo backtracking.

    The trial step of each line search is the Barzilai-Borwein step from
    the previous iteration; backtracking then enforces sufficient
    decrease, so the objective never increases between accepted iterates.
    """
    S = linalg.as_hermitian(S)
    a = np.asarray(a, dtype=float)
    norm = config.norm
    rng = np.random.default_rng(config.seed)
    V = random_family(a, S.shape[0], rng) if start is None else retract(_rows(start).copy(), a)

    f = objective(V, S, norm)
    rg = project_tangent(V, euclidean_gradient(V, S, norm))
    gn2 = _inner(rg, rg)
    history = [f]
    step = config.step_init
    reason = "max_iters"
    it = 0
    while it < config.max_iters:
        if np.sqrt(gn2) <= config.grad_tol:
            reason = "grad_tol"
            break
        w = config.stall_window
        if it >= w and history[-w - 1] - f <= config.stall_rtol * (1.0 + abs(f)):
            reason = "stalled"
            break
        t = step
        while True:
            Vn = retract(V - t * rg, a)
            fn = objective(Vn, S, norm)
            expected = config.armijo_c * t * gn2
            if fn <= f - expected:
                break
            # sufficient decrease is below floating-point resolution of f
            if expected <= 1e-15 * (1.0 + abs(f)) and fn <= f:
                break
            t *= config.armijo_shrink
            if t < 1e-20:
                Vn = None
                break
        if Vn is None:
            reason = "line_search"
            break
        rgn = project_tangent(Vn, euclidean_gradient(Vn, S, norm))
        s_vec = Vn - V
        y_vec = rgn - rg
        sy = _inner(s_vec, y_vec)
        step = min(max(_inner(s_vec, s_vec) / sy, 1e-10), 1e10) if sy > 0 else config.step_init
        V, f, rg = Vn, fn, rgn
        gn2 = _inner(rg, rg)
        history.append(f)
        it += 1

    fam = FrameFamily(V, a)
    X = residual(V, S)
    return DescentReport(
        final_family=fam,
        final_objective=f,
        final_spectrum=linalg.eigvalsh_desc(X, method=EIG),
        iterations=it,
        grad_norm=float(np.sqrt(gn2)),
        converged=bool(np.sqrt(gn2) <= config.grad_tol),
        stop_reason=reason,
        seed=config.seed,
        norm=str(norm),
        history=history,
    )


def multi_start(S, a, norm, seeds, **kwargs) -> list[DescentReport]:
    return [descend(S, a, DescentConfig(norm=norm, seed=int(s), **kwargs)) for s in seeds]


# ---------------------------------------------------------------------------
# structure of critical points


@dataclass
class LocalMinStructure:
    """Eigen-structure of a (near) critical family.

    Index sets are 0-based. ``J[j]`` lists vectors whose Rayleigh quotient
    falls in cluster ``j``; ``K[j]`` lists positions ``i < rank(S_G)`` of the
    paired spectra with ``lam_i(S) - lam_i(S_G)`` equal to ``constants[j]``.
    """

    constants: np.ndarray
    J: list[list[int]]
    K: list[list[int]]
    residuals: np.ndarray
    rank: int
    consecutive: bool
    k_sets_exhaust: bool

    @property
    def p(self) -> int:
        return len(self.constants)


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if values[cur] - values[prev] > tol:
            groups.append([])
        groups[-1].append(int(cur))
    return groups


def structure_report(G, S, cluster_tol: float = 1e-5) -> LocalMinStructure:
    V = _rows(G)
    S = linalg.as_hermitian(S)
    k = V.shape[0]
    X = residual(V, S)
    a = np.sum(np.abs(V) ** 2, axis=1)
    XV = V @ X.T
    rho = np.real(np.sum(V.conj() * XV, axis=1)) / a
    scale = 1.0 + np.max(np.abs(rho))
    tol = cluster_tol * scale
    groups = _cluster(rho, tol)
    consts = np.array([rho[g].mean() for g in groups])
    J = [sorted(g) for g in groups]
    cidx = np.empty(k, dtype=int)
    for j, g in enumerate(groups):
        cidx[g] = j
    res = np.linalg.norm(XV - consts[cidx][:, None] * V, axis=1)

    lam = linalg.eigvalsh_desc(S)
    mu = linalg.eigvalsh_desc(linalg.rank_one_sum(V))
    rank = int(np.sum(mu > tol))
    dlt = lam - mu
    K = [[i for i in range(rank) if abs(dlt[i] - c) <= tol] for c in consts]
    exhaust = sorted(i for Kj in K for i in Kj) == list(range(rank))

    ends = np.cumsum([len(g) for g in J])
    starts = np.concatenate(([0], ends[:-1]))
    ok = True
    for j in range(len(J)):
        last = j == len(J) - 1
        lo, hi = int(starts[j]), int(ends[j])
        if last:
            ok &= J[j] == list(range(lo, k)) and K[j] == list(range(lo, rank))
        else:
            ok &= J[j] == list(range(lo, hi)) and K[j] == J[j]
    return LocalMinStructure(consts, J, K, res, rank, bool(ok and exhaust), exhaust)


# ---------------------------------------------------------------------------
# escape curves


class PreconditionError(ValueError):
    """The configuration does not show the block violation the curve needs."""


def _swap_curvature(gamma, a_h, a_l, c_low, c_high):
    return (4 * c_low * (a_h - a_l * gamma**2) + 4 * (a_h + a_l * gamma) ** 2
            + 4 * c_high * (a_l * gamma**2 - a_h))


def _choose_gamma(a_h, a_l, c_low, c_high) -> float:
    grid = 2.0 ** np.arange(-6, 7)
    cands = np.concatenate([grid, -grid, [-a_h / (a_l + (c_high - c_low))]])
    vals = _swap_curvature(cands, a_h, a_l, c_low, c_high)
    return float(cands[np.argmin(vals)])


@dataclass
class SwapCurve:
    """Two-vector rotation mixing ``g_h`` (low constant) and ``g_l`` (high constant)."""

    vectors: np.ndarray
    h: int
    l: int
    gamma: float
    curvature: float

    def __call__(self, t: float) -> FrameFamily:
        V = self.vectors.copy()
        gh, gl = self.vectors[self.h], self.vectors[self.l]
        nh, nl = np.linalg.norm(gh), np.linalg.norm(gl)
        wh, wl = gh / nh, gl / nl
        V[self.h] = np.cos(t) * gh + np.sin(t) * nh * wl
        V[self.l] = np.cos(self.gamma * t) * gl + np.sin(self.gamma * t) * nl * wh
        return FrameFamily.from_vectors(V)


def escape_swap(G, S, h: int, l: int, tol: float = 1e-8) -> SwapCurve:
    """Curve through ``G`` that strictly lowers every strictly convex norm.

    Needs ``g_h, g_l`` orthogonal eigenvectors of ``S - S_G`` with
    eigenvalues ``c_h < c_l`` and ``l < h`` (so ``a_l >= a_h``); ``gamma``
    is picked where the second derivative of the squared Frobenius norm of
    the 2x2 residual block at ``t = 0`` is most negative.
    """
    V = _rows(G).copy()
    X = residual(V, S)
    if not (0 <= l < h < V.shape[0]):
        raise PreconditionError(f"need 0 <= l < h < k, got l={l}, h={h}")
    gh, gl = V[h], V[l]
    a_h, a_l = float(np.vdot(gh, gh).real), float(np.vdot(gl, gl).real)
    scale = tol * (1.0 + np.linalg.norm(X))
    c = []
    for g, a_ in ((gh, a_h), (gl, a_l)):
        Xg = X @ g
        rho = float(np.vdot(g, Xg).real) / a_
        if np.linalg.norm(Xg - rho * g) > scale * np.sqrt(a_):
            raise PreconditionError("g_h and g_l must be eigenvectors of S - S_G")
        c.append(rho)
    c_low, c_high = c
    if not c_low < c_high - scale:
        raise PreconditionError(f"need c_h < c_l, got c_h={c_low}, c_l={c_high}")
    if abs(np.vdot(gh, gl)) > scale * np.sqrt(a_h * a_l):
        raise PreconditionError("g_h and g_l must be orthogonal")
    if a_l < a_h - scale:
        raise PreconditionError("need a_l >= a_h")
    gamma = _choose_gamma(a_h, a_l, c_low, c_high)
    return SwapCurve(V, h, l, gamma, float(_swap_curvature(gamma, a_h, a_l, c_low, c_high)))


def joint_eigenbasis(S, SG, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ONB diagonalizing ``S`` and ``S_G`` with both spectra non-increasing.

    Returns ``(basis, lam, mu)`` with ``basis[:, i]`` the i-th vector.
    Raises :class:`PreconditionError` if no such basis exists.
    """
    S = linalg.as_hermitian(S)
    SG = linalg.as_hermitian(SG)
    scale = tol * (1.0 + np.linalg.norm(S) + np.linalg.norm(SG))
    eig = linalg.herm_eig(S)
    lam, B = eig.values, eig.vectors.copy()
    i = 0
    while i < lam.size:
        j = i + 1
        while j < lam.size and lam[i] - lam[j] <= scale:
            j += 1
        if j - i > 1:
            sub = B[:, i:j]
            inner = linalg.herm_eig(sub.conj().T @ SG @ sub)
            B[:, i:j] = sub @ inner.vectors
        i = j
    mu = np.real(np.einsum("ij,jk,ki->i", B.conj().T, SG, B))
    if np.linalg.norm(SG - (B * mu) @ B.conj().T) > scale:
        raise PreconditionError("S and S_G are not jointly diagonalizable")
    if np.any(np.diff(mu) > scale):
        raise PreconditionError("no joint eigenbasis orders both spectra non-increasingly")
    return B, lam, mu


@dataclass
class TransferCurve:
    """Deformation moving spectral mass of ``S_G`` from position ``i`` to ``j``."""

    vectors: np.ndarray
    basis: np.ndarray
    i: int
    j: int
    mu_i: float
    mu_j: float

    def block(self, t: float) -> np.ndarray:
        """Compression of ``S_{G(t)}`` to ``span(v_j, v_i)``."""
        s = np.sqrt(1.0 - t * t)
        return np.array([[self.mu_j + t * t * self.mu_i, t * s * self.mu_i],
                         [t * s * self.mu_i, s * s * self.mu_i]])

    def top_eigenvalue(self, t: float) -> float:
        A = self.block(t)
        half = 0.5 * (A[0, 0] - A[1, 1])
        return 0.5 * (A[0, 0] + A[1, 1]) + float(np.hypot(half, A[0, 1]))

    def transfer(self, t: float) -> float:
        return self.top_eigenvalue(t) - self.mu_j

    def __call__(self, t: float) -> FrameFamily:
        if t == 0.0:
            return FrameFamily.from_vectors(self.vectors.copy())
        if not 0.0 <= t < 1.0:
            raise ValueError("curve parameter must lie in [0, 1)")
        d = self.basis.shape[0]
        vi, vj = self.basis[:, self.i], self.basis[:, self.j]
        s = np.sqrt(1.0 - t * t)
        Vt = np.eye(d) + (s - 1.0) * np.outer(vi, vi.conj()) + t * np.outer(vj, vi.conj())
        moved = self.vectors @ Vt.T
        A = self.block(t)
        theta = 0.5 * np.arctan2(2.0 * A[0, 1], A[0, 0] - A[1, 1])
        X = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        Bji = np.stack([vj, vi], axis=1)
        U = np.eye(d) - Bji @ Bji.conj().T + Bji @ X @ Bji.conj().T
        return FrameFamily.from_vectors(moved @ U.conj())


def escape_transfer(G, S, i: int, j: int, tol: float = 1e-8) -> TransferCurve:
    """Curve through ``G`` that moves eigenvalue mass between paired positions.

    With ``S`` and ``S_G`` diagonal in a common ordered basis, positions
    ``j < i`` inside ``rank(S_G)`` with residual constants
    ``lam_i - mu_i < lam_j - mu_j`` form a misordered pair; the curve raises
    ``mu_j`` and lowers ``mu_i`` by the same amount, shrinking the residual
    spectrum in the majorization order.
    """
    V = _rows(G).copy()
    SG = linalg.rank_one_sum(V)
    B, lam, mu = joint_eigenbasis(S, SG, tol)
    d = lam.size
    if not (0 <= j < i < d):
        raise PreconditionError(f"need 0 <= j < i < d, got j={j}, i={i}")
    scale = tol * (1.0 + np.max(np.abs(lam)) + np.max(np.abs(mu)))
    if mu[i] <= scale:
        raise PreconditionError(f"position i={i} lies outside the range of S_G")
    if not lam[i] - mu[i] < lam[j] - mu[j] - scale:
        raise PreconditionError("need lam_i - mu_i < lam_j - mu_j")
    ci = V @ B[:, i].conj()
    cj = V @ B[:, j].conj()
    norms = np.linalg.norm(V, axis=1)
    if np.any((np.abs(ci) > scale * norms) & (np.abs(cj) > scale * norms)):
        raise PreconditionError("some vector has components along both v_i and v_j")
    return TransferCurve(V, B, i, j, float(mu[i]), float(mu[j]))
