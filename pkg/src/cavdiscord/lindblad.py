"""Brute-force check of the analytic decoherence factor.

One atom and its cavity mode are integrated in a truncated Fock space under
the dispersive interaction ``V = W[(n + 1)|e><e| - n|g><g|]`` plus zero-
temperature cavity loss ``gamma (2 a rho a^+ - a^+ a rho - rho a^+ a)``,
using fixed-step RK4 in the interaction picture. Tracing out the field gives
the atomic coherence, which is compared with ``zeta_c * f(t)``.

Operators are ordered atom-major: index ``atom * (n_max + 1) + n`` with atom
0 = e and 1 = g. Integration time is measured in units of ``1/omega_eff``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .matrix import IDENTITY2, dagger, kron, partial_trace
from .model import PhysicalParams, SingleAtomInit, decoherence_factor

TRUNCATION_TOL = 1e-10
MAX_PHASE_STEP = 0.05


def default_n_max(alpha: complex) -> int:
    a = abs(alpha)
    if a <= 1.0:
        return 16
    return math.ceil(a * a + 8 * a + 8)


def truncated_norm(alpha: complex, n_max: int) -> float:
    """Poisson weight ``e^{-|alpha|^2} sum_{n <= n_max} |alpha|^{2n}/n!``."""
    mean = abs(alpha) ** 2
    term = math.exp(-mean)
    total = term
    for n in range(1, n_max + 1):
        term *= mean / n
        total += term
    return total


@dataclass(frozen=True)
class FockSpace:
    n_max: int = 16

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be a positive integer")

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def check_truncation(self, alpha: complex) -> None:
        kept = truncated_norm(alpha, self.n_max)
        if kept < 1.0 - TRUNCATION_TOL:
            raise ValueError(
                f"n_max={self.n_max} keeps only {kept:.12f} of the coherent "
                f"state with |alpha|={abs(alpha):g}"
            )

    def annihilation(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.dim)), 1).astype(complex)


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed RK4 step ``dt`` in units of ``1/omega_eff``."""

    dt: float = 0.002
    method: str = "RK4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.method != "RK4":
            raise ValueError(f"unsupported integrator {self.method!r}")

    def check_step(self, fock: FockSpace) -> None:
        # fastest dispersive phase is omega_eff * (n_max + 1)
        if self.dt * (fock.n_max + 1) > MAX_PHASE_STEP * (1 + 1e-12):
            raise ValueError(
                f"step {self.dt:g} too coarse for n_max={fock.n_max}: "
                f"need dt*(n_max+1) <= {MAX_PHASE_STEP}"
            )


def coherent_vector(alpha: complex, fock: FockSpace) -> np.ndarray:
    """Truncated coherent-state amplitudes, renormalised to unit norm."""
    fock.check_truncation(alpha)
    alpha = complex(alpha)
    amps = np.empty(fock.dim, dtype=complex)
    amps[0] = 1.0
    for n in range(1, fock.dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps / np.linalg.norm(amps)


def build_interaction(params: PhysicalParams, fock: FockSpace) -> np.ndarray:
    n = np.arange(fock.dim, dtype=float)
    w = params.omega_eff
    return np.diag(np.concatenate([w * (n + 1), -w * n])).astype(complex)


class Liouvillian:
    """Generator ``-i[V, rho] + gamma(2 a rho a^+ - a^+ a rho - rho a^+ a)``."""

    def __init__(self, params: PhysicalParams, fock: FockSpace):
        self.params = params
        self.fock = fock
        self.v = build_interaction(params, fock)
        self.a = kron(IDENTITY2, fock.annihilation())
        self.a_dag = dagger(self.a)
        self.number = self.a_dag @ self.a

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if rho.shape != (self.dim, self.dim):
            raise ValueError(
                f"state of shape {rho.shape} does not match dimension {self.dim}"
            )
        out = -1j * (self.v @ rho - rho @ self.v)
        g = self.params.gamma
        if g:
            out += g * (
                2.0 * self.a @ rho @ self.a_dag
                - self.number @ rho
                - rho @ self.number
            )
        return out


def liouvillian_apply(rho, params: PhysicalParams, fock: FockSpace) -> np.ndarray:
    return Liouvillian(params, fock)(np.asarray(rho, dtype=complex))


def initial_state(init: SingleAtomInit, alpha: complex, fock: FockSpace) -> np.ndarray:
    psi = coherent_vector(alpha, fock)
    return kron(init.matrix(), np.outer(psi, psi.conj()))


def _step_count(t_end: float, params: PhysicalParams, cfg: IntegratorConfig):
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    scaled_end = t_end * params.omega_eff
    n = int(round(scaled_end / cfg.dt))
    if n == 0:
        return 0, 0.0
    return n, t_end / n


def iter_evolve(
    init: SingleAtomInit,
    alpha: complex,
    params: PhysicalParams,
    t_end: float,
    cfg: IntegratorConfig,
    fock: FockSpace | None = None,
) -> Iterator[tuple[float, np.ndarray]]:
    """Yield ``(t, rho)`` after every RK4 step, starting with ``t = 0``.

    ``t_end`` is rounded to a whole number of steps of (roughly) ``cfg.dt``.
    """
    fock = fock or FockSpace(default_n_max(alpha))
    fock.check_truncation(alpha)
    cfg.check_step(fock)
    gen = Liouvillian(params, fock)
    rho = initial_state(init, alpha, fock)
    yield 0.0, rho
    n_steps, h = _step_count(t_end, params, cfg)
    for k in range(1, n_steps + 1):
        k1 = gen(rho)
        k2 = gen(rho + 0.5 * h * k1)
        k3 = gen(rho + 0.5 * h * k2)
        k4 = gen(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + dagger(rho))
        yield k * h, rho


def evolve(
    init: SingleAtomInit,
    alpha: complex,
    params: PhysicalParams,
    t_end: float,
    cfg: IntegratorConfig,
    fock: FockSpace | None = None,
    stride: int = 1,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Atom-field trajectory, keeping every ``stride``-th snapshot."""
    times, states = [], []
    for k, (t, rho) in enumerate(iter_evolve(init, alpha, params, t_end, cfg, fock)):
        if k % stride == 0:
            times.append(t)
            states.append(rho)
    return np.asarray(times), states


def atom_state(rho: np.ndarray) -> np.ndarray:
    dim_field = rho.shape[0] // 2
    return partial_trace(rho, (2, dim_field), "A")


@dataclass(frozen=True)
class VerificationResult:
    max_deviation: float
    max_population_drift: float
    max_trace_error: float
    n_points: int


def verify_against_analytic(
    init: SingleAtomInit,
    alpha: complex,
    params: PhysicalParams,
    t_end: float,
    cfg: IntegratorConfig,
    fock: FockSpace | None = None,
) -> VerificationResult:
    """Largest ``|rho_eg(t) - zeta_c f(t)|`` over every integration step in
    ``[0, t_end]``, along with population and trace drift."""
    if init.zeta_c == 0:
        raise ValueError("need an initial coherence (zeta_c != 0) to compare")
    p_alpha = replace(params, alpha=alpha)
    dev = drift = trace_err = 0.0
    count = 0
    for t, rho in iter_evolve(init, alpha, params, t_end, cfg, fock):
        atom = atom_state(rho)
        analytic = init.zeta_c * decoherence_factor(p_alpha, t)
        dev = max(dev, abs(atom[0, 1] - analytic))
        drift = max(
            drift, abs(atom[0, 0] - init.zeta_a), abs(atom[1, 1] - init.zeta_b)
        )
        trace_err = max(trace_err, abs(np.trace(rho) - 1.0))
        count += 1
    return VerificationResult(float(dev), float(drift), float(trace_err), count)
