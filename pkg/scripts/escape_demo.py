"""Objective along the two escape curves for a misordered configuration.

Uses the orthonormal basis against ``S = diag(3, 2, 1)`` with unit norms,
where both the swap pattern (vectors 2 and 1) and the transfer pattern
(eigen-positions 2 and 1) apply, and tabulates the objective under several
norms for a few curve parameters.
"""
import numpy as np

from gfod import descent, uinorms


def main():
    S = np.diag([3.0, 2.0, 1.0])
    G = np.eye(3, dtype=complex)
    norms = [uinorms.FROBENIUS, uinorms.schatten(1.5), uinorms.schatten(3), uinorms.spectral_plus_fro(1.0)]
    curves = {"swap": descent.escape_swap(G, S, 2, 1), "transfer": descent.escape_transfer(G, S, 2, 1)}
    print("swap gamma:", curves["swap"].gamma, " second derivative:", curves["swap"].curvature)
    header = "curve      t      " + "  ".join(f"{str(N):>12}" for N in norms)
    print(header)
    for name, curve in curves.items():
        for t in (0.0, 1e-3, 1e-2, 1e-1, 0.3):
            vals = "  ".join(f"{descent.objective(curve(t), S, N):12.8f}" for N in norms)
            print(f"{name:<9} {t:6.3f}  {vals}")


if __name__ == "__main__":
    main()
