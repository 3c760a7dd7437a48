"""Hamiltonians and initial states for the detector/bath models.

Mode 0 is the detector; bath modes follow in order, so bath mode ``j``
(1-based, as in the figures) sits at index ``j``. Hamiltonians written with
ladder operators are converted with ``a = (q + i p) / sqrt(2)`` and additive
constants are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InstabilityError, InvalidProfileError, ValidationError
from .gaussian import QuadraticHamiltonian, direct_sum, thermal_nu, thermal_state


@dataclass(frozen=True)
class SwitchingProfile:
    """Smooth compactly supported switching: ramp ``ramp`` up, hold, ramp down by ``duration``."""

    ramp: float
    duration: float

    def __post_init__(self):
        if not (self.ramp > 0 and self.ramp < self.duration / 2):
            raise InvalidProfileError(
                f"need 0 < ramp < duration/2, got ramp={self.ramp}, duration={self.duration}"
            )

    def __call__(self, t):
        return switching_value(t, self)


def _tanh_cot(x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.tanh(np.cos(x) / np.sin(x))


def switching_value(t, profile: SwitchingProfile):
    """Evaluate the switching function; vectorized over ``t``."""
    t = np.asarray(t, dtype=float)
    d, tau = profile.ramp, profile.duration
    out = np.zeros_like(t)
    up = (t >= 0) & (t < d)
    hold = (t >= d) & (t < tau - d)
    down = (t >= tau - d) & (t < tau)
    out[hold] = 1.0
    out[up] = 0.5 - 0.5 * _tanh_cot(np.pi * t[up] / d)
    out[down] = 0.5 + 0.5 * _tanh_cot(np.pi * (t[down] - tau) / d)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DrivenHamiltonian:
    """``F(t) = static + chi(t) * interaction`` with a fixed mode partition."""

    static: np.ndarray
    interaction: np.ndarray
    switching: Callable
    system: tuple[int, ...] = (0,)
    environment: tuple[int, ...] = ()

    @property
    def n_modes(self) -> int:
        return self.static.shape[0] // 2

    def __call__(self, t: float) -> QuadraticHamiltonian:
        chi = float(self.switching(t))
        return QuadraticHamiltonian(
            self.static + chi * self.interaction, self.system, self.environment
        )


def _free_block(omegas) -> np.ndarray:
    return np.diag(np.repeat(0.5 * np.asarray(omegas, dtype=float), 2))


def _couple_q(F: np.ndarray, i: int, j: int, coefficient: float) -> None:
    """Add ``coefficient * q_i q_j`` to ``x^T F x``, split evenly across F[i,j] and F[j,i]."""
    F[2 * i, 2 * j] += 0.5 * coefficient
    F[2 * j, 2 * i] += 0.5 * coefficient


@dataclass(frozen=True)
class CavityModelSpec:
    """Detector coupled to ``n_modes`` Dirichlet modes of a 1D cavity.

    ``position`` defaults to the cavity midpoint; that choice is an assumption
    the run metadata reports.
    """

    n_modes: int
    length: float
    omega: float
    coupling: float
    T_S: float
    T_E: float
    switching: SwitchingProfile
    position: float | None = None

    def __post_init__(self):
        if self.position is None:
            object.__setattr__(self, "position", 0.5 * self.length)
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValidationError("cavity needs at least one mode")
        if not self.length > 0:
            raise ValidationError("cavity length must be positive")
        if not 0 < self.position < self.length:
            raise ValidationError("detector position must lie strictly inside the cavity")
        if not self.omega > 0:
            raise ValidationError("detector frequency must be positive")
        if self.T_S < 0 or self.T_E < 0:
            raise ValidationError("temperatures must be non-negative")

    kind = "cavity"

    @property
    def total_modes(self) -> int:
        return self.n_modes + 1

    @property
    def mode_frequencies(self) -> np.ndarray:
        j = np.arange(1, self.n_modes + 1)
        return j * np.pi / self.length

    @property
    def couplings(self) -> np.ndarray:
        """Coefficient of ``q_s q_j`` in the interaction (before switching)."""
        j = np.arange(1, self.n_modes + 1)
        return 2.0 * self.coupling * np.sin(j * np.pi * self.position / self.length)

    def driven_hamiltonian(self) -> DrivenHamiltonian:
        n = self.total_modes
        static = _free_block(np.concatenate([[self.omega], self.mode_frequencies]))
        interaction = np.zeros((2 * n, 2 * n))
        for j, g in enumerate(self.couplings, start=1):
            _couple_q(interaction, 0, j, g)
        return DrivenHamiltonian(static, interaction, self.switching, (0,), tuple(range(1, n)))

    def environment_hamiltonian(self) -> QuadraticHamiltonian:
        return QuadraticHamiltonian(_free_block(self.mode_frequencies))


@dataclass(frozen=True)
class ChainModelSpec:
    """Detector coupled locally to a periodic chain of identical oscillators.

    ``contacts`` lists the 1-based chain sites the detector couples to.
    """

    n_modes: int
    omega: float
    alpha: float
    coupling: float
    T_S: float
    T_E: float
    switching: SwitchingProfile
    contacts: tuple[int, ...] = (1,)

    kind = "chain"

    def __post_init__(self):
        object.__setattr__(self, "contacts", tuple(int(c) for c in self.contacts))
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValidationError("chain needs at least one site")
        if not self.omega > 0:
            raise ValidationError("frequency must be positive")
        if not abs(2 * self.alpha) < self.omega:
            raise InstabilityError(f"|2 alpha| must be below omega for a stable ring (alpha={self.alpha})")
        if not self.contacts or any(not 1 <= c <= self.n_modes for c in self.contacts):
            raise ValidationError("contacts must be non-empty and within 1..N")
        if len(set(self.contacts)) != len(self.contacts):
            raise ValidationError("contacts must be distinct")
        if self.T_S < 0 or self.T_E < 0:
            raise ValidationError("temperatures must be non-negative")

    @property
    def total_modes(self) -> int:
        return self.n_modes + 1

    def potential_matrix(self) -> np.ndarray:
        """Matrix ``K`` of the chain potential ``q^T K q / 2``, ring closure included."""
        n = self.n_modes
        K = self.omega * np.eye(n)
        for i in range(n):
            K[i, (i + 1) % n] += self.alpha
            K[(i + 1) % n, i] += self.alpha
        return K

    def normal_mode_frequencies(self) -> np.ndarray:
        """Closed-form ring dispersion ``sqrt(w (w + 2 alpha cos(2 pi k / N)))``."""
        k = np.arange(self.n_modes)
        return np.sqrt(self.omega * (self.omega + 2 * self.alpha * np.cos(2 * np.pi * k / self.n_modes)))

    def environment_hamiltonian(self) -> QuadraticHamiltonian:
        n = self.n_modes
        F = _free_block(np.full(n, self.omega))
        for i in range(n):
            _couple_q(F, i, (i + 1) % n, self.alpha)
        return QuadraticHamiltonian(F)

    def driven_hamiltonian(self) -> DrivenHamiltonian:
        n = self.total_modes
        static = direct_sum(_free_block([self.omega]), self.environment_hamiltonian().F)
        interaction = np.zeros((2 * n, 2 * n))
        for c in self.contacts:
            _couple_q(interaction, 0, c, self.coupling)
        return DrivenHamiltonian(static, interaction, self.switching, (0,), tuple(range(1, n)))


ModelSpec = CavityModelSpec | ChainModelSpec


def build_cavity_F(spec: CavityModelSpec, t: float) -> QuadraticHamiltonian:
    return spec.driven_hamiltonian()(t)


def build_chain_F(spec: ChainModelSpec, t: float) -> QuadraticHamiltonian:
    return spec.driven_hamiltonian()(t)


def initial_joint_state(spec: ModelSpec) -> np.ndarray:
    """Uncorrelated product of the detector and bath Gibbs states."""
    nu_s = thermal_nu(spec.omega, spec.T_S)
    sigma_e = thermal_state(spec.environment_hamiltonian(), spec.T_E)
    return direct_sum(nu_s * np.eye(2), sigma_e)
