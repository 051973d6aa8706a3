"""Continuous-time algebraic Riccati equation solver.

Solves  A'P + PA - PBR^{-1}B'P + Q = 0  for the stabilizing P by the
classical invariant-subspace method: assemble the 2n x 2n Hamiltonian

    H = [ A   -S ]          S = B R^{-1} B'
        [-Q   -A']

compute a real ordered Schur decomposition with the open-left-half-plane
eigenvalues sorted to the leading block, and recover P from the basis of
the stable invariant subspace. The Schur solution is then polished with a
few Newton-Kleinman iterations, each of which solves the Lyapunov equation

    (A - B K)' X + X (A - B K) = -(Q + K' R K)

for the next iterate via a dense Kronecker-product linear system. For the
4x4 lateral models used here the polish typically converges in one step
and leaves residuals near machine precision.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import schur


class RiccatiSolverError(RuntimeError):
    """Raised when no stabilizing solution can be extracted.

    Carries the best residual norm seen, for diagnostics.
    """

    def __init__(self, message: str, residual: float = float("nan")) -> None:
        super().__init__(message)
        self.residual = residual


def care_residual(
    a: np.ndarray, b: np.ndarray, q: np.ndarray, r: np.ndarray, p: np.ndarray
) -> float:
    """Frobenius norm of A'P + PA - PBR^{-1}B'P + Q."""
    s = b @ np.linalg.solve(r, b.T)
    return float(np.linalg.norm(a.T @ p + p @ a - p @ s @ p + q, "fro"))


def _solve_lyapunov(a_cl: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A_cl' X + X A_cl = rhs for symmetric X.

    Vectorized form: (I (x) A_cl' + A_cl' (x) I) vec(X) = vec(rhs), using
    the column-major vec convention, so the dense system is built with
    Kronecker products and handed to a standard LU solve. Fine for the
    small state dimensions this package works with.
    """
    n = a_cl.shape[0]
    eye = np.eye(n)
    lhs = np.kron(eye, a_cl.T) + np.kron(a_cl.T, eye)
    x = np.linalg.solve(lhs, rhs.reshape(-1, order="F")).reshape((n, n), order="F")
    return 0.5 * (x + x.T)


def solve_care(
    a: np.ndarray,
    b: np.ndarray,
    q: np.ndarray,
    r: np.ndarray,
    tol_scale: float = 1e-9,
    max_refine: int = 20,
) -> tuple[np.ndarray, float]:
    """Stabilizing CARE solution.

    Returns (P, residual_norm) where P is symmetric positive semidefinite
    and residual_norm is the Frobenius norm of the Riccati residual at P.
    Raises RiccatiSolverError if the Hamiltonian does not split into n
    stable and n antistable eigenvalues, if the subspace basis is
    singular, or if the residual never meets tol_scale * max(1, ||Q||_F).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or q.shape != (n, n):
        raise ValueError("A and Q must be square and equally sized")
    if b.ndim != 2 or b.shape[0] != n:
        raise ValueError("B must have one row per state")
    if r.shape != (b.shape[1], b.shape[1]):
        raise ValueError("R must be m x m for B n x m")

    s = b @ np.linalg.solve(r, b.T)
    hamiltonian = np.block([[a, -s], [-q, -a.T]])

    _, vectors, stable_count = schur(
        hamiltonian, output="real", sort=lambda re, im: re < 0.0
    )
    if stable_count != n:
        raise RiccatiSolverError(
            f"Hamiltonian has {stable_count} stable eigenvalues, expected {n}; "
            "the pair (A, B) may not be stabilizable"
        )

    basis_top = vectors[:n, :n]
    basis_bottom = vectors[n:, :n]
    try:
        # P = U21 U11^{-1}, computed as a solve on the transposed system.
        p = np.linalg.solve(basis_top.T, basis_bottom.T).T
    except np.linalg.LinAlgError as exc:
        raise RiccatiSolverError("stable subspace basis is singular") from exc
    p = 0.5 * (p + p.T)

    tol = tol_scale * max(1.0, float(np.linalg.norm(q, "fro")))
    residual = care_residual(a, b, q, r, p)
    best_p, best_residual = p, residual

    # Newton-Kleinman polish. Monotone once inside the basin, which the
    # Schur seed guarantees; keep the best iterate in case of stagnation.
    for _ in range(max_refine):
        if best_residual <= tol:
            break
        gain = np.linalg.solve(r, b.T @ best_p)
        a_cl = a - b @ gain
        if np.max(np.linalg.eigvals(a_cl).real) >= 0.0:
            break
        p_next = _solve_lyapunov(a_cl, -(q + gain.T @ r @ gain))
        residual = care_residual(a, b, q, r, p_next)
        if not np.isfinite(residual) or residual >= best_residual:
            break
        best_p, best_residual = p_next, residual

    if best_residual > tol:
        raise RiccatiSolverError(
            f"Riccati residual {best_residual:.3e} above tolerance {tol:.3e}",
            residual=best_residual,
        )
    return best_p, best_residual
