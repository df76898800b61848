"""Correlation measures for two-qubit states: mutual information, classical
correlation and discord under projective measurements on qubit B, and
concurrence.

Entropies are in bits throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrix import (
    IDENTITY2,
    PSD_TOL,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    check_density_matrix,
    entropy_from_eigenvalues,
    hermitian_eigenvalues,
    kron,
    partial_trace,
    sqrtm_psd,
    von_neumann_entropy,
)
from .model import CorrelationVector, x_form_error

NEGLIGIBLE_PROB = 1e-12

GRID_THETA = 64
GRID_PHI = 128
REFINE_STARTS = 3
REFINE_ITERATIONS = 60
REFINE_SHRINK = 0.5

_SIGMA_YY = kron(SIGMA_Y, SIGMA_Y)


@dataclass(frozen=True)
class Measurement:
    """Projective measurement on qubit B along the Bloch direction ``(theta, phi)``."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "Measurement":
        """Build from unconstrained angles, folding them onto the sphere chart."""
        theta = math.fmod(theta, 2 * math.pi)
        if theta < 0:
            theta += 2 * math.pi
        if theta > math.pi:
            theta = 2 * math.pi - theta
            phi += math.pi
        phi = math.fmod(phi, 2 * math.pi)
        if phi < 0:
            phi += 2 * math.pi
        if phi >= 2 * math.pi:
            phi = 0.0
        return cls(theta, phi)

    @property
    def direction(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        nx, ny, nz = self.direction
        n_sigma = nx * SIGMA_X + ny * SIGMA_Y + nz * SIGMA_Z
        return (IDENTITY2 + n_sigma) / 2, (IDENTITY2 - n_sigma) / 2


@dataclass(frozen=True)
class MeasuredDecomposition:
    """Outcome probabilities and post-measurement states.

    A post-state is ``None`` when its outcome has probability at most
    ``NEGLIGIBLE_PROB``; such outcomes carry no conditional entropy.
    """

    probabilities: tuple[float, ...]
    post_states: tuple[Optional[np.ndarray], ...]


@dataclass(frozen=True)
class CorrelationReport:
    mutual_info: float
    classical_corr: float
    discord: float
    argmin_measurement: Measurement


def _two_qubit(rho) -> np.ndarray:
    rho = check_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a two-qubit state, got shape {rho.shape}")
    return rho


def mutual_information(rho) -> float:
    rho = _two_qubit(rho)
    s_a = von_neumann_entropy(partial_trace(rho, (2, 2), "A"))
    s_b = von_neumann_entropy(partial_trace(rho, (2, 2), "B"))
    return s_a + s_b - von_neumann_entropy(rho)


def measure_b(rho, m: Measurement) -> MeasuredDecomposition:
    rho = _two_qubit(rho)
    probs, states = [], []
    for proj in m.projectors():
        lifted = kron(IDENTITY2, proj)
        unnorm = lifted @ rho @ lifted
        p = float(np.real(np.trace(unnorm)))
        probs.append(p)
        states.append(unnorm / p if p > NEGLIGIBLE_PROB else None)
    return MeasuredDecomposition(tuple(probs), tuple(states))


def conditional_entropy(rho, m: Measurement) -> float:
    dec = measure_b(rho, m)
    return sum(
        p * von_neumann_entropy(s)
        for p, s in zip(dec.probabilities, dec.post_states)
        if s is not None
    )


def _binary_entropy_2x2(a, d, b) -> np.ndarray:
    """Total ``p * S(sigma/p)`` for Hermitian 2x2 blocks ``[[a, b], [b*, d]]``
    with ``p = a + d``, vectorised over leading axes."""
    tr = a + d
    disc = np.sqrt((a - d) ** 2 + 4.0 * np.abs(b) ** 2)
    out = np.zeros_like(tr)
    for lam in ((tr + disc) / 2, (tr - disc) / 2):
        lam = np.clip(lam, 0.0, None)
        safe = np.where(lam > 0, lam, 1.0)
        out -= np.where(lam > 0, lam * np.log2(safe), 0.0)
    # p S(sigma/p) = -sum lam log lam + p log p
    safe_tr = np.where(tr > NEGLIGIBLE_PROB, tr, 1.0)
    out += np.where(tr > NEGLIGIBLE_PROB, tr * np.log2(safe_tr), 0.0)
    return np.where(tr > NEGLIGIBLE_PROB, out, 0.0)


def conditional_entropy_batch(rho, theta, phi) -> np.ndarray:
    """Measured conditional entropy over arrays of angles.

    For a rank-one projector ``B`` the post-measurement state factorises as
    ``sigma (x) B / p`` with ``sigma = Tr_B[(I (x) B) rho]``, so only the 2x2
    block ``sigma`` needs diagonalising.
    """
    rho = np.asarray(rho, dtype=complex)
    theta, phi = np.broadcast_arrays(
        np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    )
    n = np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)],
        axis=-1,
    )
    t = rho.reshape(2, 2, 2, 2)  # (a, b, a', b')
    total = np.zeros(theta.shape)
    for sign in (1.0, -1.0):
        # B = (I + sign n.sigma)/2; sigma_{a a'} = sum_{b b'} rho_{a b, a' b'} B_{b' b}
        proj = 0.5 * (
            IDENTITY2
            + sign
            * (
                n[..., 0, None, None] * SIGMA_X
                + n[..., 1, None, None] * SIGMA_Y
                + n[..., 2, None, None] * SIGMA_Z
            )
        )
        sigma = np.einsum("ibjc,...cb->...ij", t, proj)
        total += _binary_entropy_2x2(
            sigma[..., 0, 0].real, sigma[..., 1, 1].real, sigma[..., 0, 1]
        )
    return total


def _pattern_search(rho, theta: float, phi: float, value: float, step: float):
    """Compass search in (theta, phi) with a shrinking step."""
    for _ in range(REFINE_ITERATIONS):
        cand_t = np.array([theta + step, theta - step, theta, theta])
        cand_p = np.array([phi, phi, phi + step, phi - step])
        vals = conditional_entropy_batch(rho, cand_t, cand_p)
        k = int(np.argmin(vals))
        if vals[k] < value:
            theta, phi, value = float(cand_t[k]), float(cand_p[k]), float(vals[k])
        else:
            step *= REFINE_SHRINK
    return theta, phi, value


def minimize_conditional_entropy(rho) -> tuple[float, Measurement]:
    """Smallest measured conditional entropy and the measurement attaining it.

    A 64 x 128 grid over the upper hemisphere (antipodal directions give the
    same pair of projectors) seeds a compass search from each of the three
    best grid points. Grid ties go to the smallest theta, then phi.
    """
    rho = _two_qubit(rho)
    thetas = np.linspace(0.0, math.pi / 2, GRID_THETA)
    phis = np.arange(GRID_PHI) * (2 * math.pi / GRID_PHI)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    vals = conditional_entropy_batch(rho, tt, pp).ravel()
    order = np.argsort(vals, kind="stable")[:REFINE_STARTS]
    step = thetas[1] - thetas[0]
    best = None
    for k in order:
        i, j = divmod(int(k), GRID_PHI)
        cand = _pattern_search(rho, thetas[i], phis[j], float(vals[k]), step)
        if best is None or cand[2] < best[2]:
            best = cand
    theta, phi, value = best
    return value, Measurement.from_angles(theta, phi)


def classical_correlation(rho) -> tuple[float, Measurement]:
    """``S(rho_A)`` minus the minimal measured conditional entropy."""
    rho = _two_qubit(rho)
    s_a = von_neumann_entropy(partial_trace(rho, (2, 2), "A"))
    cond, m = minimize_conditional_entropy(rho)
    return s_a - cond, m


def discord_numeric(rho) -> CorrelationReport:
    rho = _two_qubit(rho)
    mi = mutual_information(rho)
    j, m = classical_correlation(rho)
    return CorrelationReport(mi, j, mi - j, m)


def _xlog2x(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def bell_diagonal_information(d: CorrelationVector) -> tuple[float, float]:
    """Mutual information and classical correlation of a Bell-diagonal state."""
    d1, d2, d3 = d.as_tuple()
    us = (1 - d1 - d2 - d3, 1 - d1 + d2 + d3, 1 + d1 - d2 + d3, 1 + d1 + d2 - d3)
    if min(us) < -4e-12:
        raise ValueError(f"unphysical correlation vector {d.as_tuple()}")
    mutual = sum(_xlog2x(max(u, 0.0)) for u in us) / 4
    c = max(abs(d1), abs(d2), abs(d3))
    classical = (_xlog2x(1 - c) + _xlog2x(1 + c)) / 2
    return mutual, classical


def discord_bell_diagonal(d: CorrelationVector) -> float:
    """Closed-form discord of a Bell-diagonal state.

    The classical part is the binary-entropy deficit along the axis with the
    largest ``|d_i|``; the result vanishes for the maximally mixed state.
    """
    mutual, classical = bell_diagonal_information(d)
    return mutual - classical


def spin_flip(rho) -> np.ndarray:
    return _SIGMA_YY @ np.conj(rho) @ _SIGMA_YY


def concurrence_general(rho) -> float:
    """Concurrence from the Hermitian matrix ``sqrt(rho) rho~ sqrt(rho)``,
    whose spectrum equals that of ``rho rho~``."""
    rho = _two_qubit(rho)
    root = sqrtm_psd(rho)
    herm = root @ spin_flip(rho) @ root
    lam = hermitian_eigenvalues(0.5 * (herm + herm.conj().T))
    if lam[0] < -PSD_TOL:
        raise ValueError(f"spin-flipped spectrum has negative value {lam[0]:.3e}")
    chi = np.sqrt(np.clip(lam, 0.0, None))[::-1]
    return max(0.0, float(chi[0] - chi[1] - chi[2] - chi[3]))


def concurrence_xstate(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("expected a 4x4 state")
    if x_form_error(rho) > 1e-12:
        raise ValueError("state is not of X form")
    pop = np.real(np.diag(rho))
    a = abs(rho[1, 2]) - math.sqrt(max(pop[0] * pop[3], 0.0))
    b = abs(rho[0, 3]) - math.sqrt(max(pop[1] * pop[2], 0.0))
    return 2.0 * max(0.0, a, b)


def concurrence_model(p: float, fsq: float) -> float:
    """Concurrence of the evolved Werner state given ``|f(t)|**2``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not 0.0 < fsq <= 1.0 + 1e-15:
        raise ValueError(f"|f|^2 must lie in (0, 1], got {fsq}")
    return max(0.0, p * fsq - (1 - p) / 2)
