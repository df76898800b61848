"""Small dense complex linear algebra: tensor products, partial traces,
Hermitian eigendecomposition and von Neumann entropy.

Matrices are plain ``numpy`` arrays of complex dtype. Density matrices are
not wrapped in a class; :func:`check_density_matrix` enforces their
invariants where a caller needs them.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9

# Qubit basis order is (|e>, |g>), so sigma_z = |e><e| - |g><g|.
IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T.copy()


class InvalidStateError(ValueError):
    """A matrix failed one of the density-matrix invariants."""


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(a))


def kron(a, b) -> np.ndarray:
    """Tensor product ``a (x) b``; row and column dimensions multiply."""
    return np.kron(as_matrix(a), as_matrix(b))


def hermiticity_error(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - dagger(h)))) if h.size else 0.0


def partial_trace(rho, dims: tuple[int, int], keep: str = "A") -> np.ndarray:
    """Reduce a bipartite operator on ``dA x dB`` to subsystem ``keep``.

    ``keep`` is ``"A"`` (trace out B) or ``"B"`` (trace out A). Subsystem A
    is the left tensor factor.
    """
    rho = as_matrix(rho)
    d_a, d_b = (int(d) for d in dims)
    if rho.shape != (d_a * d_b, d_a * d_b):
        raise ValueError(
            f"operator of shape {rho.shape} does not match dims {d_a}x{d_b}"
        )
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def _jacobi_rotation(app: float, aqq: float, apq: complex):
    """2x2 unitary ``G`` with ``G^H [[app, apq], [conj(apq), aqq]] G`` diagonal."""
    g = abs(apq)
    phase = apq / g
    theta = (aqq - app) / (2.0 * g)
    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # Phase-strip the pair to a real symmetric block, then a real rotation.
    rot = np.array(
        [[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex
    )
    return rot


def hermitian_eigh(
    h, *, tol: float = HERMITIAN_TOL, max_sweeps: int = 60
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.

    Cyclic complex Jacobi: each off-diagonal pair is phase-stripped and
    annihilated by a plane rotation, sweeping until the off-diagonal mass
    is negligible relative to the matrix norm.
    """
    a = as_matrix(h).copy()
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if hermiticity_error(a) > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian (error {hermiticity_error(a):.3e})"
        )
    a = 0.5 * (a + dagger(a))
    v = np.eye(n, dtype=complex)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= 1e-15 * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300 or abs(apq) <= 1e-18 * norm:
                    continue
                rot = _jacobi_rotation(a[p, p].real, a[q, q].real, apq)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = dagger(rot) @ a[idx, :]
                app, aqq = a[p, p].real, a[q, q].real
                a[p, q] = a[q, p] = 0.0
                a[p, p], a[q, q] = app, aqq
                v[:, idx] = v[:, idx] @ rot
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def hermitian_eigenvalues(h, *, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, with multiplicity, ascending."""
    return hermitian_eigh(h, tol=tol)[0]


def entropy_from_eigenvalues(eigenvalues) -> float:
    """Shannon entropy in bits of a spectrum, using ``0 log 0 = 0``."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size and lam.min() < -PSD_TOL:
        raise InvalidStateError(
            f"eigenvalue {lam.min():.3e} is below -{PSD_TOL:g}"
        )
    lam = lam[lam > 0.0]
    return float(-np.sum(lam * np.log2(lam)))


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho log2 rho)`` in bits."""
    return entropy_from_eigenvalues(hermitian_eigenvalues(rho))


def check_density_matrix(rho, *, atol_psd: float = PSD_TOL) -> np.ndarray:
    """Return ``rho`` as an array, raising :class:`InvalidStateError` unless it
    is Hermitian, unit trace and positive semidefinite."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got {rho.shape}")
    herm = hermiticity_error(rho)
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"not Hermitian (error {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {tr:.12g} differs from 1")
    lo = hermitian_eigenvalues(rho)[0]
    if lo < -atol_psd:
        raise InvalidStateError(f"smallest eigenvalue {lo:.3e} is negative")
    return rho


def is_density_matrix(rho) -> bool:
    try:
        check_density_matrix(rho)
    except InvalidStateError:
        return False
    return True


def sqrtm_psd(rho) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix."""
    w, v = hermitian_eigh(rho)
    if w.size and w[0] < -PSD_TOL:
        raise InvalidStateError(f"eigenvalue {w[0]:.3e} is negative")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)
