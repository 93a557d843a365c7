"""Dense complex matrix kernel.

Hermitian eigendecomposition is LAPACK (``numpy.linalg.eigh``) by default;
a cyclic Jacobi solver is kept as an independent route. Norm routines accept
stacks of matrices with shape ``(..., d, d)``.
"""

from __future__ import annotations

import logging
import math
import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg

log = logging.getLogger(__name__)

HERM_TOL = 1e-10
BRANCH_TOL = 1e-12


class NotHermitianError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


class InvalidDensityMatrixError(ValueError):
    pass


class BranchAmbiguityWarning(RuntimeWarning):
    """An eigenphase sat on -pi and was mapped to +pi."""


def dagger(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2).conj()


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0


def is_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim >= 2 and a.shape[-1] == a.shape[-2] and bool(
        np.max(np.abs(a - dagger(a)), initial=0.0) <= tol * _scale(a)
    )


def is_unitary(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        return False
    eye = np.eye(a.shape[-1])
    return bool(np.max(np.abs(dagger(a) @ a - eye), initial=0.0) <= tol)


def _require_hermitian(a: np.ndarray, what: str = "input") -> None:
    if not is_hermitian(a):
        raise NotHermitianError(f"{what} is not Hermitian")


def _require_unitary(a: np.ndarray, what: str = "input") -> None:
    if not is_unitary(a):
        raise NotUnitaryError(f"{what} is not unitary")


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi eigensolver for Hermitian ``a``.

    Sweeps until the off-diagonal Frobenius mass is at most ``tol * ||a||_F``.
    Returns ascending eigenvalues and a unitary eigenvector matrix.
    """
    _require_hermitian(a)
    A = np.array(a, dtype=complex)
    d = A.shape[0]
    V = np.eye(d, dtype=complex)
    target = tol * np.linalg.norm(A)
    for _ in range(max_sweeps):
        if np.linalg.norm(A - np.diag(np.diag(A))) <= target:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) == 0.0:
                    continue
                phase = apq / abs(apq)
                app, aqq = A[p, p].real, A[q, q].real
                theta = 0.5 * math.atan2(2.0 * abs(apq), aqq - app)
                c, s = math.cos(theta), math.sin(theta)
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] zeroes A[p, q]
                G = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = A[:, [p, q]] @ G
                A[:, [p, q]] = cols
                rows = G.conj().T @ A[[p, q], :]
                A[[p, q], :] = rows
                A[q, p] = 0.0
                A[p, q] = 0.0
                V[:, [p, q]] = V[:, [p, q]] @ G
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(A).real
    idx = np.argsort(w, kind="stable")
    return w[idx], V[:, idx]


def herm_eig(a: np.ndarray, method: str = "lapack") -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix."""
    _require_hermitian(a)
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    a = np.asarray(a)
    return np.linalg.eigh(0.5 * (a + dagger(a)))


def exp_from_eig(w: np.ndarray, q: np.ndarray, scale: float) -> np.ndarray:
    """exp(i * scale * H) given H = q diag(w) q^dagger."""
    return (q * np.exp(1j * scale * w)) @ dagger(q)


def exp_herm(h: np.ndarray, scale: float) -> np.ndarray:
    """e^{i * scale * h} for Hermitian ``h``."""
    w, q = herm_eig(h)
    return exp_from_eig(w, q, scale)


def unitary_eig(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in (-pi, pi] and unitary eigenvectors of a unitary matrix.

    Uses the complex Schur form, which is diagonal for normal input, so
    degenerate eigenvalues still get an orthonormal basis.
    """
    t, z = scipy.linalg.schur(np.asarray(w, dtype=complex), output="complex")
    phases = np.angle(np.diag(t))
    near = phases <= -math.pi + BRANCH_TOL
    if np.any(near):
        warnings.warn(
            f"{int(near.sum())} eigenphase(s) at -pi mapped to +pi", BranchAmbiguityWarning, stacklevel=2
        )
        phases = np.where(near, math.pi, phases)
    return phases, z


def log_unitary_principal(w: np.ndarray) -> np.ndarray:
    """Hermitian G with e^{iG} = w and spectrum in (-pi, pi]."""
    _require_unitary(w)
    phases, z = unitary_eig(w)
    g = (z * phases) @ dagger(z)
    return 0.5 * (g + dagger(g))


def _hermitian_kind(a: np.ndarray) -> int:
    """1 if Hermitian, -1 if anti-Hermitian, 0 otherwise (whole stack)."""
    s = _scale(a) * 1e-12
    ad = dagger(a)
    if np.max(np.abs(a - ad), initial=0.0) <= s:
        return 1
    if np.max(np.abs(a + ad), initial=0.0) <= s:
        return -1
    return 0


def _abs_spectrum(a: np.ndarray) -> np.ndarray:
    """Singular values; Hermitian eigensolve when (anti-)Hermitian, else SVD."""
    kind = _hermitian_kind(a)
    if kind == 1:
        return np.abs(np.linalg.eigvalsh(0.5 * (a + dagger(a))))
    if kind == -1:
        b = 0.5j * (a - dagger(a))
        return np.abs(np.linalg.eigvalsh(b))
    return np.linalg.svd(a, compute_uv=False)


def spectral_norm(a: np.ndarray) -> float | np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape[-1] == 0:
        return 0.0
    out = np.max(_abs_spectrum(a), axis=-1)
    return float(out) if out.ndim == 0 else out


def trace_norm(a: np.ndarray) -> float | np.ndarray:
    a = np.asarray(a, dtype=complex)
    out = np.sum(_abs_spectrum(a), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def frobenius_norm(a: np.ndarray) -> float | np.ndarray:
    a = np.asarray(a)
    out = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))
    return float(out) if np.ndim(out) == 0 else out


def conjugate(u: np.ndarray, a: np.ndarray) -> np.ndarray:
    """u a u^dagger."""
    if u.shape != a.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {a.shape}")
    _require_unitary(u)
    return u @ a @ dagger(u)


def check_density_matrix(rho: np.ndarray, tol: float = HERM_TOL) -> None:
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol):
        raise InvalidDensityMatrixError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvalidDensityMatrixError(f"trace is {np.trace(rho).real:.3g}, expected 1")
    if np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0] < -tol:
        raise InvalidDensityMatrixError("density matrix is not positive semidefinite")


def expectation(o: np.ndarray, rho: np.ndarray) -> float:
    """Tr(O rho) for Hermitian O and a density matrix rho."""
    _require_hermitian(o, "observable")
    check_density_matrix(rho)
    val = np.einsum("ij,ji->", o, rho)
    if abs(val.imag) > HERM_TOL * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


class SylvesterSolution(NamedTuple):
    M: np.ndarray
    residual: float
    exists: bool


def solve_sylvester_for_M(h: np.ndarray, hp: np.ndarray) -> SylvesterSolution:
    """Minimum-norm Hermitian M with [iM, h] = hp.

    In the eigenbasis of h the equation is elementwise,
    (lam_l - lam_k) (iM)_kl = hp_kl; entries whose gap is below
    1e-10 * ||h|| are left at zero and show up in the residual.
    """
    if h.shape != hp.shape:
        raise ValueError(f"dimension mismatch: {h.shape} vs {hp.shape}")
    _require_hermitian(h, "H")
    _require_hermitian(hp, "H'")
    lam, q = herm_eig(h)
    hp_hat = dagger(q) @ hp @ q
    gap = lam[None, :] - lam[:, None]
    solvable = np.abs(gap) > 1e-10 * max(float(np.max(np.abs(lam), initial=0.0)), 1e-300)
    im_hat = np.zeros_like(hp_hat)
    np.divide(hp_hat, gap, out=im_hat, where=solvable)
    m = q @ (-1j * im_hat) @ dagger(q)
    m = 0.5 * (m + dagger(m))
    residual = float(frobenius_norm(commutator(1j * m, h) - hp))
    exists = residual <= 1e-8 * float(frobenius_norm(hp))
    return SylvesterSolution(m, residual, exists)
