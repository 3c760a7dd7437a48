"""Fixed-step RK4 integration of ``dS/dt = Omega F_s(t) S`` from ``S = 1``.

Two routes compute the same RK4 propagator:

* a generic one for any callable ``t -> F``, stepping one step at a time;
* a fast one for :class:`~gaussbath.models.DrivenHamiltonian`
  (``F = F0 + chi(t) F1``). The RK4 step matrix is a polynomial in the three
  stage values of ``chi``, so it is assembled for many steps at once. Runs of
  steps with constant ``chi`` reuse one step matrix raised to a power.

Symplectic defect is measured at every sample and the run aborts once it
passes ``100 * EPS_SYMP``; nothing is silently repaired unless ``project`` is
requested.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import (
    InvalidDimensionError,
    NumericalOverflowError,
    NumericalQualityError,
    StepSizeError,
    ValidationError,
)
from .gaussian import EPS_PSD, EPS_SYMP, QuadraticHamiltonian, symmetrize, symplectic_eigenvalues, symplectic_form
from .models import DrivenHamiltonian

log = logging.getLogger(__name__)

ABORT_FACTOR = 100.0
_BATCH = 2048


@dataclass(frozen=True)
class IntegrationGrid:
    """Uniform step grid with a monotone set of sample times on it."""

    t_start: float
    t_end: float
    dt: float
    sample_times: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if not self.t_end > self.t_start:
            raise ValidationError("t_end must exceed t_start")
        n = (self.t_end - self.t_start) / self.dt
        if abs(n - round(n)) > 1e-6:
            raise ValidationError(f"span {self.t_end - self.t_start} is not a multiple of dt={self.dt}")
        samples = tuple(float(t) for t in self.sample_times) or (self.t_start, self.t_end)
        object.__setattr__(self, "sample_times", samples)
        k = self.sample_steps
        if np.any(np.diff(k) < 0) or k[0] < 0 or k[-1] > self.n_steps:
            raise ValidationError("sample times must be monotone and inside the grid")

    @classmethod
    def uniform(cls, t_start: float, t_end: float, dt: float, n_intervals: int) -> "IntegrationGrid":
        """Samples at ``n_intervals + 1`` evenly spaced times including both ends."""
        if n_intervals < 1:
            raise ValidationError("need at least one sample interval")
        return cls(t_start, t_end, dt, tuple(np.linspace(t_start, t_end, n_intervals + 1)))

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    @property
    def sample_steps(self) -> np.ndarray:
        x = (np.asarray(self.sample_times) - self.t_start) / self.dt
        k = np.rint(x).astype(int)
        if np.any(np.abs(x - k) > 1e-6):
            raise ValidationError("sample times must lie on the step grid")
        return k

    def step_time(self, k):
        return self.t_start + np.asarray(k) * self.dt


@dataclass(frozen=True)
class SymplecticPropagator:
    S: np.ndarray
    t: float
    defect: float


def symplectic_defect(S: np.ndarray) -> float:
    """``max |S^T Omega S - Omega|``."""
    omega = symplectic_form(S.shape[0] // 2)
    return float(np.max(np.abs(S.T @ omega @ S - omega)))


def project_symplectic(S: np.ndarray, iterations: int = 2) -> np.ndarray:
    """Pull a nearly symplectic matrix back onto the group (first-order correction)."""
    omega = symplectic_form(S.shape[0] // 2)
    for _ in range(iterations):
        err = S.T @ omega @ S - omega
        S = S @ (np.eye(S.shape[0]) + 0.5 * omega @ err)
    return S


def rk4_step(A: Callable[[float], np.ndarray], t: float, h: float, S: np.ndarray) -> np.ndarray:
    """One classical RK4 step of ``dS/dt = A(t) S``."""
    a1, a2, a3 = A(t), A(t + 0.5 * h), A(t + h)
    k1 = a1 @ S
    k2 = a2 @ (S + 0.5 * h * k1)
    k3 = a2 @ (S + 0.5 * h * k2)
    k4 = a3 @ (S + h * k3)
    return S + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


# RK4 step matrix for dS/dt = A(t) S, as a sum of products of stage generators:
#   M = 1 + h/6 (A_a + 4 A_b + A_c) + h^2/6 (A_b A_a + A_b A_b + A_c A_b)
#         + h^3/12 (A_b A_b A_a + A_c A_b A_b) + h^4/24 A_c A_b A_b A_a
# with a, b, c the start, midpoint and end of the step.
_RK4_TERMS = (
    (1, 6, "a"), (4, 6, "b"), (1, 6, "c"),
    (1, 6, "ba"), (1, 6, "bb"), (1, 6, "cb"),
    (1, 12, "bba"), (1, 12, "cbb"),
    (1, 24, "cbba"),
)  # fmt: skip


def _expand_rk4_terms():
    """Expand the RK4 terms over ``A = A0 + chi A1``.

    Returns ``{word: [(weight, power_of_h, exponents_abc), ...]}`` where a word
    is a tuple of 0/1 picking ``A0`` or ``A1`` for each factor (left to right).
    """
    words: dict[tuple[int, ...], list] = {}
    for num, den, stages in _RK4_TERMS:
        for word in itertools.product((0, 1), repeat=len(stages)):
            exps = [0, 0, 0]
            for stage, bit in zip(stages, word):
                if bit:
                    exps["abc".index(stage)] += 1
            words.setdefault(word, []).append((num / den, len(stages), tuple(exps)))
    return words


_RK4_WORDS = _expand_rk4_terms()


class _AffineStepper:
    """Batched RK4 step matrices for ``A(t) = A0 + chi(t) A1``."""

    def __init__(self, A0: np.ndarray, A1: np.ndarray, h: float):
        self.h = h
        self.dim = A0.shape[0]
        factors = (A0, A1)
        self.words = list(_RK4_WORDS)
        mats = []
        for word in self.words:
            m = np.eye(self.dim)
            for bit in word:
                m = m @ factors[bit]
            mats.append(m.ravel())
        self.word_matrices = np.array(mats)
        self._constant: dict[float, np.ndarray] = {}

    def coefficients(self, a, b, c) -> np.ndarray:
        stage = (np.asarray(a), np.asarray(b), np.asarray(c))
        coeff = np.zeros((stage[0].size, len(self.words)))
        for col, word in enumerate(self.words):
            for weight, order, exps in _RK4_WORDS[word]:
                term = weight * self.h**order
                for values, e in zip(stage, exps):
                    if e:
                        term = term * values**e
                coeff[:, col] += term
        return coeff

    def step_matrices(self, a, b, c) -> np.ndarray:
        m = (self.coefficients(a, b, c) @ self.word_matrices).reshape(-1, self.dim, self.dim)
        m += np.eye(self.dim)
        return m

    def constant_step(self, chi: float) -> np.ndarray:
        if chi not in self._constant:
            self._constant[chi] = self.step_matrices([chi], [chi], [chi])[0]
        return self._constant[chi]


def _advance_affine(stepper: _AffineStepper, switching, grid: IntegrationGrid, k0: int, k1: int, S):
    """Apply steps ``k0 .. k1 - 1`` to ``S``."""
    h = grid.dt
    for start in range(k0, k1, _BATCH):
        stop = min(start + _BATCH, k1)
        t = grid.step_time(np.arange(start, stop))
        a = switching(t)
        b = switching(t + 0.5 * h)
        c = switching(t + h)
        a, b, c = np.atleast_1d(a), np.atleast_1d(b), np.atleast_1d(c)
        const = (a == b) & (b == c)
        # runs of one constant chi value, or of varying chi
        key = np.where(const, a, np.nan)
        same = (key[1:] == key[:-1]) | (np.isnan(key[1:]) & np.isnan(key[:-1]))
        bounds = np.concatenate([[0], np.flatnonzero(~same) + 1, [stop - start]])
        for i, j in zip(bounds[:-1], bounds[1:]):
            if const[i]:
                S = np.linalg.matrix_power(stepper.constant_step(float(a[i])), int(j - i)) @ S
            else:
                for M in stepper.step_matrices(a[i:j], b[i:j], c[i:j]):
                    S = M @ S
    return S


def _check(S: np.ndarray, t: float, limit: float) -> SymplecticPropagator:
    if not np.all(np.isfinite(S)):
        raise NumericalOverflowError(f"non-finite propagator entries at t={t}")
    defect = symplectic_defect(S)
    if defect > limit:
        raise StepSizeError(
            f"symplectic defect {defect:.3e} exceeds {limit:.1e} at t={t}; reduce dt"
        )
    return SymplecticPropagator(S, float(t), defect)


def propagate(
    hamiltonian: Callable[[float], QuadraticHamiltonian] | DrivenHamiltonian,
    grid: IntegrationGrid,
    *,
    project: bool = False,
    defect_limit: float = ABORT_FACTOR * EPS_SYMP,
) -> Iterator[SymplecticPropagator]:
    """Yield the propagator ``S(t)`` at each of ``grid.sample_times``."""
    sample_steps = grid.sample_steps
    if isinstance(hamiltonian, DrivenHamiltonian):
        omega = symplectic_form(hamiltonian.n_modes)
        A0 = omega @ (hamiltonian.static + hamiltonian.static.T)
        A1 = omega @ (hamiltonian.interaction + hamiltonian.interaction.T)
        stepper = _AffineStepper(A0, A1, grid.dt)

        def advance(k0, k1, S):
            return _advance_affine(stepper, hamiltonian.switching, grid, k0, k1, S)

        dim = A0.shape[0]
    else:
        first = hamiltonian(grid.t_start)
        dim = first.F.shape[0]
        omega = symplectic_form(dim // 2)

        def A(t):
            return omega @ hamiltonian(t).F_s

        def advance(k0, k1, S):
            for k in range(k0, k1):
                S = rk4_step(A, float(grid.step_time(k)), grid.dt, S)
                if project:
                    S = project_symplectic(S)
            return S

    S = np.eye(dim)
    k_prev = 0
    for k in sample_steps:
        S = advance(k_prev, int(k), S)
        if project and isinstance(hamiltonian, DrivenHamiltonian):
            S = project_symplectic(S)
        k_prev = int(k)
        yield _check(S, float(grid.step_time(k)), defect_limit)


def integrate(hamiltonian, grid: IntegrationGrid, **kwargs) -> list[SymplecticPropagator]:
    """All sampled propagators as a list; see :func:`propagate`."""
    return list(propagate(hamiltonian, grid, **kwargs))


def evolve_state(sigma0: np.ndarray, propagator: SymplecticPropagator | np.ndarray, tol: float = EPS_PSD):
    """``S sigma0 S^T``, re-symmetrized and re-validated."""
    S = propagator.S if isinstance(propagator, SymplecticPropagator) else np.asarray(propagator)
    if S.shape != sigma0.shape:
        raise InvalidDimensionError(f"propagator {S.shape} does not match state {sigma0.shape}")
    sigma = symmetrize(S @ sigma0 @ S.T)
    nu_min = symplectic_eigenvalues(sigma, check=False)[-1]
    if nu_min < 1.0 - tol:
        raise NumericalQualityError(f"evolved state violates uncertainty: min nu = {nu_min:.3e}")
    return sigma


def evolve_states(sigma0: np.ndarray, propagators: Sequence[SymplecticPropagator]) -> list[np.ndarray]:
    return [evolve_state(sigma0, p) for p in propagators]
