"""Dense small-matrix kernels.

Everything here targets matrices of a few dozen rows at most: a cyclic
Jacobi eigensolver for symmetric matrices, a Lyapunov solver for the
singular Laplacian pencil, a Hamiltonian-subspace Riccati solver and a
Kronecker-form Sylvester solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    KernelMismatchError,
    NoConvergenceError,
    NoStableSubspaceError,
    NotStabilizableError,
    NotSymmetricError,
    ResidualTooLargeError,
    SingularPencilError,
)

# |lambda| <= KERNEL_RTOL * max(1, lambda_max) counts as a structural zero.
KERNEL_RTOL = 1e-9
SYM_RTOL = 1e-12
JACOBI_RTOL = 1e-12
MAX_SWEEPS = 100
ARE_RTOL = 1e-10
SYLVESTER_RTOL = 1e-10


@dataclass(frozen=True)
class SymEigen:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0


def _scale(*mats: np.ndarray) -> float:
    out = 1.0
    for m in mats:
        if m.size:
            out = max(out, float(np.abs(m).max()))
    return out


def _as_square(s, name: str = "matrix") -> np.ndarray:
    s = np.atleast_2d(np.asarray(s, dtype=float))
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"{name} must be square, got shape {s.shape}")
    return s


def check_symmetric(s: np.ndarray, rtol: float = SYM_RTOL) -> None:
    if np.max(np.abs(s - s.T), initial=0.0) > rtol * _scale(s):
        raise NotSymmetricError("matrix is not symmetric")


def sym_eigen(s) -> SymEigen:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps over all off-diagonal pairs, annihilating each with a plane
    rotation, until every off-diagonal entry is below ``1e-12 * ||s||_F``.

    Raises
    ------
    NotSymmetricError
        If ``s`` is not symmetric to 1e-12 relative tolerance.
    NoConvergenceError
        If 100 sweeps do not reach the tolerance.
    """
    a = _as_square(s).copy()
    check_symmetric(a)
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    tol = JACOBI_RTOL * np.linalg.norm(a)
    sweeps = 0
    if n > 1 and tol > 0.0:
        iu = np.triu_indices(n, 1)
        while np.max(np.abs(a[iu])) >= tol:
            if sweeps == MAX_SWEEPS:
                raise NoConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
            sweeps += 1
            _jacobi_sweep(a, v)
        # converged sweeps are quadratic: one more pushes residuals to rounding level
        if np.max(np.abs(a[iu])) > 0.0:
            _jacobi_sweep(a, v)
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return SymEigen(values=values[order], vectors=v[:, order], sweeps=sweeps)


def _jacobi_sweep(a: np.ndarray, v: np.ndarray) -> None:
    """One cyclic pass of plane rotations over the upper triangle, in place."""
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if apq == 0.0:
                continue
            app, aqq = a[p, p], a[q, q]
            g = 100.0 * abs(apq)
            if abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                a[p, q] = a[q, p] = 0.0
                continue
            theta = (aqq - app) / (2.0 * apq)
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            sn = t * c
            # a <- J^T a J, J the (p, q) plane rotation
            ap = a[:, p].copy()
            aq = a[:, q].copy()
            a[:, p] = c * ap - sn * aq
            a[:, q] = sn * ap + c * aq
            rp = a[p, :].copy()
            rq = a[q, :].copy()
            a[p, :] = c * rp - sn * rq
            a[q, :] = sn * rp + c * rq
            a[p, q] = a[q, p] = 0.0
            vp = v[:, p].copy()
            vq = v[:, q].copy()
            v[:, p] = c * vp - sn * vq
            v[:, q] = sn * vp + c * vq


def matrix_exp_sym(s, t: float) -> np.ndarray:
    """``exp(t * s)`` for symmetric ``s`` via its eigendecomposition."""
    eig = sym_eigen(s)
    e = (eig.vectors * np.exp(eig.values * t)) @ eig.vectors.T
    return 0.5 * (e + e.T)


def psd_pseudoinverse(s) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric PSD matrix, ignoring kernel eigenvalues."""
    eig = sym_eigen(s)
    thresh = KERNEL_RTOL * max(1.0, eig.values[-1])
    keep = np.abs(eig.values) > thresh
    inv = np.zeros_like(eig.values)
    inv[keep] = 1.0 / eig.values[keep]
    p = (eig.vectors * inv) @ eig.vectors.T
    return 0.5 * (p + p.T)


def kernel_lyapunov(l, m) -> np.ndarray:
    """Solve ``-L X - X L + M = 0`` with the all-ones vector in ker(X).

    L is a connected-graph Laplacian, so the equation is singular; the
    solution is pinned down by zeroing every eigen-block whose eigenvalue
    sum falls on the kernel.  This equals the integral
    ``int_0^inf exp(-tL) M exp(-tL) dt`` whenever ``M 1 = 0``.

    Raises
    ------
    KernelMismatchError
        If ``M 1`` is not numerically zero.
    """
    l = _as_square(l, "l")
    m = _as_square(m, "m")
    if l.shape != m.shape:
        raise ValueError(f"shape mismatch {l.shape} vs {m.shape}")
    check_symmetric(m)
    ones = np.ones(l.shape[0])
    if np.max(np.abs(m @ ones)) > 1e-9 * _scale(m) * l.shape[0]:
        raise KernelMismatchError("M does not annihilate the all-ones vector")
    eig = sym_eigen(l)
    lam = eig.values
    denom = lam[:, None] + lam[None, :]
    thresh = KERNEL_RTOL * max(1.0, lam[-1])
    mt = eig.vectors.T @ m @ eig.vectors
    xt = np.where(denom > thresh, mt / np.where(denom > thresh, denom, 1.0), 0.0)
    x = eig.vectors @ xt @ eig.vectors.T
    return 0.5 * (x + x.T)


def solve_sylvester(a, b, c) -> np.ndarray:
    """Solve ``a X + X b = c`` through the Kronecker-vectorised system.

    Raises
    ------
    SingularPencilError
        If the spectra of ``a`` and ``-b`` (numerically) intersect.
    """
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    c = np.atleast_2d(np.asarray(c, dtype=float))
    n, k = a.shape[0], b.shape[0]
    if c.shape != (n, k):
        raise ValueError(f"c must have shape {(n, k)}, got {c.shape}")
    ea = np.linalg.eigvals(a)
    eb = np.linalg.eigvals(b)
    gap = np.min(np.abs(ea[:, None] + eb[None, :]))
    if gap <= 1e-12 * _scale(a, b):
        raise SingularPencilError("spectra of a and -b are not disjoint")
    # column-major vec: vec(aX + Xb) = (I kron a + b^T kron I) vec(X)
    big = (np.eye(k)[:, None, :, None] * a[None, :, None, :]).reshape(n * k, n * k)
    big += (b.T[:, None, :, None] * np.eye(n)[None, :, None, :]).reshape(n * k, n * k)
    x = np.linalg.solve(big, c.reshape(-1, order="F")).reshape((n, k), order="F")
    res = a @ x + x @ b - c
    if np.max(np.abs(res), initial=0.0) > SYLVESTER_RTOL * _scale(a, b, c) * _scale(x):
        raise SingularPencilError("Sylvester solve is ill-conditioned (large residual)")
    return x


def is_stabilizable(a, b, tol: float = 1e-9) -> bool:
    """PBH test on every eigenvalue of ``a`` with nonnegative real part."""
    a = _as_square(a, "a")
    b = np.atleast_2d(np.asarray(b, dtype=float))
    n = a.shape[0]
    for lam in np.linalg.eigvals(a):
        if lam.real >= -tol:
            pbh = np.hstack([a - lam * np.eye(n), b.astype(complex)])
            if np.linalg.matrix_rank(pbh, tol=tol * _scale(a, b)) < n:
                return False
    return True


def are_residual(a, b, q, r, p) -> np.ndarray:
    rinv_bt = np.linalg.solve(r, b.T)
    return a.T @ p + p @ a - p @ b @ rinv_bt @ p + q


def _max_abs_residual(a, s, q, p) -> float:
    return float(np.abs(a.T @ p + p @ a - p @ s @ p + q).max())


def stabilizing_are(a, b, q, r) -> np.ndarray:
    """Stabilizing solution of ``A^T P + P A - P B R^-1 B^T P + Q = 0``.

    Taken from the stable invariant subspace of the Hamiltonian matrix
    (ordered real Schur form), followed by Newton-Kleinman refinement if
    the residual is above tolerance.

    Raises
    ------
    NotStabilizableError
        If ``(a, b)`` fails the PBH stabilizability test.
    NoStableSubspaceError
        If the Hamiltonian has eigenvalues on the imaginary axis or the
        stable subspace is not a graph over the state coordinates.
    """
    a = _as_square(a, "a")
    n = a.shape[0]
    b = np.asarray(b, dtype=float).reshape(n, -1)
    q = _as_square(q, "q")
    r = _as_square(r, "r")
    check_symmetric(q)
    check_symmetric(r)
    if not is_stabilizable(a, b):
        raise NotStabilizableError("(a, b) is not stabilizable")
    s = b @ np.linalg.solve(r, b.T)
    ham = np.empty((2 * n, 2 * n))
    ham[:n, :n], ham[:n, n:], ham[n:, :n], ham[n:, n:] = a, -s, -q, -a.T
    t, z, sdim = scipy.linalg.schur(ham, output="real", sort="lhp")
    # LAPACK standardises 2x2 blocks to equal diagonals, so diag(t) holds the real parts
    if sdim != n or np.min(np.abs(np.diag(t))) <= 1e-12 * _scale(ham):
        raise NoStableSubspaceError("Hamiltonian has eigenvalues on the imaginary axis")
    u1, u2 = z[:n, :n], z[n:, :n]
    if np.linalg.cond(u1) > 1e12:
        raise NoStableSubspaceError("stable subspace is not complementary to the costate")
    p = np.linalg.solve(u1.T, u2.T).T
    p = 0.5 * (p + p.T)

    tol = ARE_RTOL * _scale(q)
    res = _max_abs_residual(a, s, q, p)
    for _ in range(5):
        if res <= tol:
            break
        ac = a - s @ p
        p = solve_sylvester(ac.T, ac, -(q + p @ s @ p))
        p = 0.5 * (p + p.T)
        res = _max_abs_residual(a, s, q, p)
    if res > tol:
        raise ResidualTooLargeError(f"ARE residual {res:.3e} above {tol:.3e}")
    if spectral_abscissa(a - s @ p) >= 0.0:
        raise NoStableSubspaceError("closed loop is not stable")
    return p


def spectral_abscissa(a) -> float:
    return float(np.max(np.linalg.eigvals(np.atleast_2d(a)).real))
