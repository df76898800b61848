"""Two atoms, each in its own lossy dispersive cavity prepared in a coherent state.

Both cavities share the same coupling, detuning, decay rate and coherent
amplitude; asymmetric cavities are not modelled. Two-qubit matrices use the
basis order ``|ee>, |eg>, |ge>, |gg>``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .matrix import check_density_matrix

BELL_TOL = 1e-9


class RawParams(NamedTuple):
    """Bare Jaynes-Cummings parameters, kept only for diagnostics."""

    g: float
    delta: float
    omega: float
    omega0: float


@dataclass(frozen=True)
class PhysicalParams:
    """Dispersive shift ``omega_eff = g**2/delta``, cavity decay ``gamma`` and
    coherent amplitude ``alpha``.

    All times handed to this module are in the same units as ``1/omega_eff``.
    With the default ``omega_eff = 1`` a time ``t`` is the scaled time
    ``omega_eff * t``.
    """

    omega_eff: float = 1.0
    gamma: float = 0.0
    alpha: complex = 0.0
    raw_params: Optional[RawParams] = None

    def __post_init__(self):
        if not self.omega_eff > 0:
            raise ValueError(f"omega_eff must be positive, got {self.omega_eff}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.raw_params is not None:
            raw = RawParams(*self.raw_params)
            object.__setattr__(self, "raw_params", raw)
            expected = raw.g**2 / raw.delta
            if abs(self.omega_eff - expected) > 1e-12 * abs(expected):
                raise ValueError(
                    f"omega_eff={self.omega_eff} is not g^2/delta={expected}"
                )

    @classmethod
    def scaled(cls, gamma_over_omega: float, alpha: complex) -> "PhysicalParams":
        """Parameters in units where ``omega_eff = 1``."""
        return cls(omega_eff=1.0, gamma=float(gamma_over_omega), alpha=alpha)

    @classmethod
    def from_raw(
        cls,
        g: float,
        delta: float,
        omega: float,
        omega0: float,
        gamma: float = 0.0,
        alpha: complex = 0.0,
    ) -> "PhysicalParams":
        if abs((omega0 - omega) - delta) > 1e-12 * max(abs(delta), 1.0):
            raise ValueError("delta must equal omega0 - omega")
        return cls(
            omega_eff=g**2 / delta,
            gamma=gamma,
            alpha=alpha,
            raw_params=RawParams(g, delta, omega, omega0),
        )

    @property
    def gamma_over_omega(self) -> float:
        return self.gamma / self.omega_eff

    @property
    def mean_photons(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class SingleAtomInit:
    """Initial atom state ``[[zeta_a, zeta_c], [conj(zeta_c), zeta_b]]`` in (e, g)."""

    zeta_a: float
    zeta_b: float
    zeta_c: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "zeta_c", complex(self.zeta_c))
        if not (0.0 <= self.zeta_a <= 1.0 and 0.0 <= self.zeta_b <= 1.0):
            raise ValueError("populations must lie in [0, 1]")
        if abs(self.zeta_a + self.zeta_b - 1.0) > 1e-12:
            raise ValueError("populations must sum to 1")
        if abs(self.zeta_c) ** 2 > self.zeta_a * self.zeta_b + 1e-12:
            raise ValueError("coherence too large for a positive state")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.zeta_a, self.zeta_c], [self.zeta_c.conjugate(), self.zeta_b]],
            dtype=complex,
        )


class Family(enum.Enum):
    """Which Bell state the Werner mixture is built on."""

    PHI = "phi"  # (|eg> + |ge>)/sqrt(2)
    PSI = "psi"  # (|ee> + |gg>)/sqrt(2)

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"phi": cls.PHI, "φ": cls.PHI, "psi": cls.PSI, "ψ": cls.PSI}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown Werner family {value!r}") from None


@dataclass(frozen=True)
class WernerSpec:
    p: float
    family: Family = Family.PHI

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"purity p must lie in [0, 1], got {self.p}")
        object.__setattr__(self, "family", Family.parse(self.family))


@dataclass(frozen=True)
class CorrelationVector:
    """Coefficients of ``sigma_i (x) sigma_i`` in a Bell-diagonal state,
    ``rho = (I + sum_i d_i sigma_i (x) sigma_i) / 4``."""

    d1: float
    d2: float
    d3: float

    def __post_init__(self):
        for name in ("d1", "d2", "d3"):
            if abs(getattr(self, name)) > 1.0 + 1e-12:
                raise ValueError(f"|{name}| exceeds 1")
        lowest = min(self.bell_weights())
        if lowest < -1e-12:
            raise ValueError(
                f"correlation vector is unphysical (Bell weight {lowest:.3e})"
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.d1, self.d2, self.d3)

    def bell_weights(self) -> tuple[float, float, float, float]:
        """The four eigenvalues ``(1 -+ d1 -+ d2 -+ d3)/4``."""
        d1, d2, d3 = self.d1, self.d2, self.d3
        return (
            (1 - d1 - d2 - d3) / 4,
            (1 - d1 + d2 + d3) / 4,
            (1 + d1 - d2 + d3) / 4,
            (1 + d1 + d2 - d3) / 4,
        )

    def max_axis(self) -> int:
        """Index (0, 1, 2 for x, y, z) of the largest ``|d_i|``."""
        return int(np.argmax(np.abs(self.as_tuple())))


def decoherence_factor(params: PhysicalParams, t: float) -> complex:
    """Complex multiplier on the atomic coherence ``|e><g|`` at time ``t``."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    w, g = params.omega_eff, params.gamma
    n = params.mean_photons
    damp = math.exp(-2.0 * g * t)
    first = -1j * w * t + n * (damp - 1.0)
    second = n * g / (g + 1j * w) * (1.0 - cmath.exp(-2.0 * (g + 1j * w) * t))
    third = n * damp * (cmath.exp(-2j * w * t) - 1.0)
    return cmath.exp(first + second + third)


def decoherence_factor_array(params: PhysicalParams, t) -> np.ndarray:
    """Vectorised :func:`decoherence_factor` over an array of times."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    w, g = params.omega_eff, params.gamma
    n = params.mean_photons
    damp = np.exp(-2.0 * g * t)
    exponent = (
        -1j * w * t
        + n * (damp - 1.0)
        + n * g / (g + 1j * w) * (1.0 - np.exp(-2.0 * (g + 1j * w) * t))
        + n * damp * (np.exp(-2j * w * t) - 1.0)
    )
    return np.exp(exponent)


def magnitude_sq(params: PhysicalParams, t: float) -> float:
    return abs(decoherence_factor(params, t)) ** 2


def asymptotic_magnitude_sq(params: PhysicalParams) -> float:
    """Long-time limit of ``|f(t)|**2``; only defined for ``gamma > 0``."""
    if params.gamma <= 0:
        raise ValueError("no long-time limit without cavity decay (gamma = 0)")
    w, g = params.omega_eff, params.gamma
    return math.exp(-2.0 * params.mean_photons * w * w / (w * w + g * g))


def dephasing_mask(f: complex) -> np.ndarray:
    """Elementwise multiplier realising ``|e><g| -> f |e><g|`` on one qubit."""
    return np.array([[1.0, f], [np.conj(f), 1.0]], dtype=complex)


def single_atom_state(init: SingleAtomInit, params: PhysicalParams, t: float) -> np.ndarray:
    return init.matrix() * dephasing_mask(decoherence_factor(params, t))


def werner_initial(spec: WernerSpec) -> np.ndarray:
    p = spec.p
    rho = np.eye(4, dtype=complex) * (1 - p) / 4
    if spec.family is Family.PHI:
        bell = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)
    else:
        bell = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return rho + p * np.outer(bell, bell.conj())


def dephase_both(rho: np.ndarray, f: complex) -> np.ndarray:
    """Apply the single-atom dephasing map to each atom of a two-atom state."""
    mask = dephasing_mask(f)
    return np.asarray(rho, dtype=complex) * np.kron(mask, mask)


def two_atom_state(spec: WernerSpec, params: PhysicalParams, t: float) -> np.ndarray:
    return dephase_both(werner_initial(spec), decoherence_factor(params, t))


def x_form_error(rho: np.ndarray) -> float:
    """Largest entry outside the diagonal and anti-diagonal."""
    rho = np.asarray(rho)
    mask = np.ones((4, 4), dtype=bool)
    idx = np.arange(4)
    mask[idx, idx] = False
    mask[idx, 3 - idx] = False
    return float(np.max(np.abs(rho[mask])))


def correlation_vector(rho) -> CorrelationVector:
    """Correlation triple of a Bell-diagonal state, up to local z-rotations.

    The phases of ``rho[0, 3]`` and ``rho[1, 2]`` are removed by a local
    rotation about z on each atom; that leaves discord and concurrence
    unchanged and makes both anti-diagonal entries real and non-negative.
    """
    rho = check_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError("expected a two-qubit (4x4) state")
    if x_form_error(rho) > BELL_TOL:
        raise ValueError("state is not of X form")
    diag = np.real(np.diag(rho))
    if abs(diag[0] - diag[3]) > BELL_TOL or abs(diag[1] - diag[2]) > BELL_TOL:
        raise ValueError("state is not Bell-diagonal: paired populations differ")
    r14 = abs(rho[0, 3])
    r23 = abs(rho[1, 2])
    d1 = 2.0 * (r23 + r14)
    d2 = 2.0 * (r23 - r14)
    d3 = float(diag[0] + diag[3] - diag[1] - diag[2])
    return CorrelationVector(float(d1), float(d2), d3)


def model_correlation_vector(spec: WernerSpec, fsq: float) -> CorrelationVector:
    """Correlation triple of the evolved Werner state given ``|f(t)|**2``."""
    c = spec.p * fsq
    if spec.family is Family.PHI:
        return CorrelationVector(c, c, -spec.p)
    return CorrelationVector(c, -c, spec.p)


@dataclass(frozen=True)
class DispersiveReport:
    ratio: float
    warning: bool
    n_relevant: int


def dispersive_validity(params: PhysicalParams, n_relevant: int) -> DispersiveReport:
    """How well ``|delta| >> sqrt(n + 1) g`` holds; warns below a ratio of 10."""
    if params.raw_params is None:
        raise ValueError("raw (g, delta, omega, omega0) parameters are required")
    if n_relevant < 0:
        raise ValueError("photon number must be non-negative")
    raw = params.raw_params
    ratio = abs(raw.delta) / (math.sqrt(n_relevant + 1) * abs(raw.g))
    return DispersiveReport(ratio=ratio, warning=ratio < 10.0, n_relevant=n_relevant)
