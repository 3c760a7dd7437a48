"""Entropic and thermal observables along a trajectory.

Entropy production is evaluated from the bath energy change and the
detector entropy change, and the relative entropy of the bath to its initial
Gibbs state from the bath energy and entropy changes. Together with the
mutual information this gives two independent routes to the same number,
``zeta == I + D``, which :func:`thermo_sample` records.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidDimensionError
from .gaussian import (
    QuadraticHamiltonian,
    entropy,
    mean_energy,
    mutual_information,
    n_modes_of,
    reduced_state,
)

log = logging.getLogger(__name__)

THERMALITY_RTOL = 1e-3


@dataclass(frozen=True)
class Partition:
    """System and environment mode indices (0-based)."""

    system: tuple[int, ...]
    environment: tuple[int, ...]

    def check(self, n_modes: int) -> None:
        modes = self.system + self.environment
        if sorted(modes) != list(range(n_modes)):
            raise InvalidDimensionError(
                f"partition {self.system}|{self.environment} does not cover {n_modes} modes"
            )


@dataclass(frozen=True)
class ThermoSample:
    t: float
    S_sys: float
    S_env: float
    S_joint: float
    mi_sys_env: float
    zeta: float
    rel_entropy: float
    T_eff: float | None
    E_env: float


@dataclass(frozen=True)
class CorrelationMap:
    t: float
    pairs: tuple[tuple[str, float], ...]

    def as_dict(self) -> dict[str, float]:
        return dict(self.pairs)


def relative_entropy_to_initial(sigma_env_t, sigma_env_0, F_env: QuadraticHamiltonian, beta: float) -> float:
    """``D(rho'_E || rho_E)`` for a Gibbs reference state at inverse temperature ``beta``.

    Uses ``D = beta (E' - E) - (S' - S)``, exact when the reference is thermal
    for ``F_env``.
    """
    d_energy = mean_energy(F_env, sigma_env_t) - mean_energy(F_env, sigma_env_0)
    return beta * d_energy - (entropy(sigma_env_t) - entropy(sigma_env_0))


def entropy_production(sigma_t, sigma_0, F_env: QuadraticHamiltonian, beta: float, partition: Partition) -> float:
    """``beta (E_E' - E_E) - (S(rho_S) - S(rho_S'))``."""
    partition.check(n_modes_of(sigma_t))
    env, sys = partition.environment, partition.system
    if F_env.n_modes != len(env):
        raise InvalidDimensionError("bath Hamiltonian does not match the environment block")
    d_energy = mean_energy(F_env, reduced_state(sigma_t, env)) - mean_energy(F_env, reduced_state(sigma_0, env))
    return beta * d_energy - (entropy(reduced_state(sigma_0, sys)) - entropy(reduced_state(sigma_t, sys)))


def temperature_from_nu(nu: float, omega: float) -> float:
    """Invert ``nu = coth(omega / 2T)``."""
    if nu <= 1.0 + 1e-12:
        return 0.0
    return omega / np.log((nu + 1.0) / (nu - 1.0))


def effective_temperature(sigma_s: np.ndarray, omega: float, rtol: float = THERMALITY_RTOL) -> float | None:
    """Temperature of the thermal state matching a single-mode covariance matrix.

    Returns ``None`` when the mode is visibly non-thermal, i.e. when the
    ``q``/``p`` variance imbalance or the ``qp`` covariance exceeds ``rtol * nu``.
    """
    sigma_s = np.asarray(sigma_s)
    if sigma_s.shape != (2, 2):
        raise InvalidDimensionError("effective temperature needs a single-mode state")
    nu = 0.5 * (sigma_s[0, 0] + sigma_s[1, 1])
    imbalance = abs(sigma_s[0, 0] - sigma_s[1, 1])
    off = abs(sigma_s[0, 1])
    if imbalance > rtol * nu or off > rtol * nu:
        log.debug("non-thermal mode: nu=%.6g imbalance=%.3g qp=%.3g", nu, imbalance, off)
        return None
    return temperature_from_nu(nu, omega)


def correlation_map(sigma_t: np.ndarray, pairs: Sequence[tuple[str, Sequence[int], Sequence[int]]], t: float = 0.0) -> CorrelationMap:
    """Mutual information for each ``(label, modes_a, modes_b)`` entry."""
    return CorrelationMap(
        float(t), tuple((label, float(mutual_information(sigma_t, a, b))) for label, a, b in pairs)
    )


def thermo_sample(
    t: float,
    sigma_t: np.ndarray,
    sigma_0: np.ndarray,
    F_env: QuadraticHamiltonian,
    beta: float,
    partition: Partition,
    omega_sys: float | None = None,
    thermality_rtol: float = THERMALITY_RTOL,
) -> ThermoSample:
    partition.check(n_modes_of(sigma_t))
    sys, env = partition.system, partition.environment
    s_t, s_0 = reduced_state(sigma_t, sys), reduced_state(sigma_0, sys)
    e_t, e_0 = reduced_state(sigma_t, env), reduced_state(sigma_0, env)
    S_sys, S_env, S_joint = entropy(s_t), entropy(e_t), entropy(sigma_t)
    S_sys0, S_env0 = entropy(s_0), entropy(e_0)
    E_env, E_env0 = mean_energy(F_env, e_t), mean_energy(F_env, e_0)

    zeta = beta * (E_env - E_env0) - (S_sys0 - S_sys)
    rel = beta * (E_env - E_env0) - (S_env - S_env0)
    T_eff = None
    if omega_sys is not None and len(sys) == 1:
        T_eff = effective_temperature(s_t, omega_sys, thermality_rtol)
    return ThermoSample(
        t=float(t),
        S_sys=S_sys,
        S_env=S_env,
        S_joint=S_joint,
        mi_sys_env=S_sys + S_env - S_joint,
        zeta=zeta,
        rel_entropy=rel,
        T_eff=T_eff,
        E_env=E_env,
    )
