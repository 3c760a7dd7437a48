"""Brute-force cross-check in a truncated Fock space.

Small instances (at most three modes) are evolved as explicit density
matrices, independently of the phase-space machinery. The Hamiltonian is

    H(t) = sum_i w_i n_i + chi(t) sum_{i<j} g_ij q_i q_j

with truncated ladder operators. The mixed state is carried as a weighted
ensemble of Fock product states (``rho = sum_k w_k |v_k><v_k|``), which is
much cheaper than a full density matrix and keeps every ``v_k`` normalized.

Stretches with constant ``chi`` use the exact propagator from an
eigendecomposition of ``H`` (per total-number parity block; the coupling
only changes the total number by an even amount). While ``chi`` varies, each
step uses a symmetric split about the midpoint value of ``chi``: half a
coupling kick, which is diagonal in the joint position basis, a full free
step, and another half kick.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import NumericalQualityError, OracleInvalidError, ValidationError
from .evolution import IntegrationGrid
from .models import CavityModelSpec, ChainModelSpec

log = logging.getLogger(__name__)

MAX_DIMENSION = 10_000
LEAKAGE_LIMIT = 1e-6
WEIGHT_FLOOR = 1e-10


def ladder(n_max: int) -> np.ndarray:
    """Truncated annihilation operator on ``n_max + 1`` levels."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1)


def position(n_max: int) -> np.ndarray:
    a = ladder(n_max)
    return (a + a.T) / np.sqrt(2.0)


def thermal_populations(omega: float, temperature: float, n_max: int) -> np.ndarray:
    """Geometric occupation ``(1 - r) r^n`` with ``r = exp(-omega/T)``, renormalized on the cutoff."""
    n = np.arange(n_max + 1)
    if temperature == 0:
        p = (n == 0).astype(float)
    else:
        p = np.exp(-omega * n / temperature)
    return p / p.sum()


@dataclass(frozen=True)
class TruncatedSystem:
    frequencies: tuple[float, ...]
    couplings: dict  # {(i, j): g} for i < j, coefficient of q_i q_j
    switching: Callable
    cutoffs: tuple[int, ...]
    temperatures: tuple[float, ...]
    environment: tuple[int, ...]
    env_temperature: float

    def __post_init__(self):
        m = len(self.frequencies)
        if not 1 <= m <= 3:
            raise ValidationError("the Fock oracle handles one to three modes")
        if len(self.cutoffs) != m or len(self.temperatures) != m:
            raise ValidationError("need one cutoff and one temperature per mode")
        if self.dimension > MAX_DIMENSION:
            raise ValidationError(f"Hilbert space dimension {self.dimension} exceeds {MAX_DIMENSION}")
        for (i, j) in self.couplings:
            if not 0 <= i < j < m:
                raise ValidationError(f"bad coupling index pair {(i, j)}")

    @property
    def n_modes(self) -> int:
        return len(self.frequencies)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def dimension(self) -> int:
        return int(np.prod(self.dims))

    @property
    def system(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_modes) if i not in self.environment)

    @classmethod
    def from_model(cls, spec: CavityModelSpec | ChainModelSpec, n_max: int = 40) -> "TruncatedSystem":
        """Fock-space mirror of a model with at most two bath modes."""
        if spec.n_modes > 2:
            raise ValidationError("the Fock oracle supports at most two bath modes")
        if isinstance(spec, CavityModelSpec):
            freqs = (spec.omega, *spec.mode_frequencies)
            couplings = {(0, j): float(g) for j, g in enumerate(spec.couplings, start=1)}
        else:
            if spec.alpha != 0:
                raise ValidationError("oracle needs a product Gibbs bath (alpha = 0)")
            freqs = (spec.omega,) * (spec.n_modes + 1)
            couplings = {(0, c): float(spec.coupling) for c in spec.contacts}
        m = len(freqs)
        return cls(
            frequencies=tuple(float(f) for f in freqs),
            couplings=couplings,
            switching=spec.switching,
            cutoffs=(n_max,) * m,
            temperatures=(spec.T_S,) + (spec.T_E,) * (m - 1),
            environment=tuple(range(1, m)),
            env_temperature=spec.T_E,
        )

    def free_energies(self) -> np.ndarray:
        """Diagonal of ``sum_i w_i n_i`` on the product grid."""
        grids = np.meshgrid(*[np.arange(d) for d in self.dims], indexing="ij")
        return sum(w * n for w, n in zip(self.frequencies, grids))

    def hamiltonian(self, chi: float) -> np.ndarray:
        """Dense ``H`` in the Fock product basis."""
        D = self.dimension
        H = np.diag(self.free_energies().ravel()).astype(float)
        for (i, j), g in self.couplings.items():
            ops = [np.eye(d) for d in self.dims]
            ops[i] = position(self.cutoffs[i])
            ops[j] = position(self.cutoffs[j])
            term = ops[0]
            for op in ops[1:]:
                term = np.kron(term, op)
            H += chi * g * term
        assert H.shape == (D, D)
        return H


@dataclass
class EnsembleState:
    """``rho = sum_k weights[k] |vectors[k]><vectors[k]|``; vectors have shape ``(K, *dims)``."""

    vectors: np.ndarray
    weights: np.ndarray
    t: float = 0.0

    @property
    def dims(self) -> tuple[int, ...]:
        return self.vectors.shape[1:]

    def density_matrix(self) -> np.ndarray:
        X = self.vectors.reshape(len(self.weights), -1)
        return (X.T * self.weights) @ X.conj()

    def reduced(self, modes: Sequence[int]) -> np.ndarray:
        """Reduced density matrix of ``modes`` (in the given order)."""
        modes = list(modes)
        rest = [i for i in range(len(self.dims)) if i not in modes]
        V = np.transpose(self.vectors, [0] + [1 + i for i in modes] + [1 + i for i in rest])
        d_a = int(np.prod([self.dims[i] for i in modes]))
        V = V.reshape(len(self.weights), d_a, -1) * np.sqrt(self.weights)[:, None, None]
        X = np.ascontiguousarray(np.swapaxes(V, 0, 1)).reshape(d_a, -1)
        return X @ X.conj().T

    def joint_spectrum(self) -> np.ndarray:
        X = self.vectors.reshape(len(self.weights), -1) * np.sqrt(self.weights)[:, None]
        return np.linalg.eigvalsh(X.conj() @ X.T)


def von_neumann(rho_or_spectrum: np.ndarray) -> float:
    p = rho_or_spectrum
    if p.ndim == 2:
        p = np.linalg.eigvalsh(0.5 * (p + p.conj().T))
    if p.min() < -1e-10:
        raise NumericalQualityError(f"density matrix has eigenvalue {p.min():.3e}")
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def initial_ensemble(system: TruncatedSystem, weight_floor: float = WEIGHT_FLOOR) -> EnsembleState:
    pops = [
        thermal_populations(w, T, n)
        for w, T, n in zip(system.frequencies, system.temperatures, system.cutoffs)
    ]
    labels, weights = [], []
    for idx in itertools.product(*[range(len(p)) for p in pops]):
        w = np.prod([p[i] for p, i in zip(pops, idx)])
        if w > weight_floor:
            labels.append(idx)
            weights.append(w)
    weights = np.array(weights)
    vectors = np.zeros((len(labels),) + system.dims, dtype=complex)
    for k, idx in enumerate(labels):
        vectors[(k,) + idx] = 1.0
    return EnsembleState(vectors, weights / weights.sum(), 0.0)


class _Propagators:
    """Caches the exact and split-step propagators for one system."""

    def __init__(self, system: TruncatedSystem, dt: float):
        self.system = system
        self.dt = dt
        self.energies = system.free_energies()
        qs = [np.linalg.eigh(position(n)) for n in system.cutoffs]
        self.q_vectors = [W for _, W in qs]
        grids = np.meshgrid(*[x for x, _ in qs], indexing="ij")
        self.coupling_grid = sum(g * grids[i] * grids[j] for (i, j), g in system.couplings.items())
        self.free_q = []
        for w, (x, W), n in zip(system.frequencies, qs, system.cutoffs):
            phase = np.exp(-1j * w * np.arange(n + 1) * dt)
            self.free_q.append(W.T @ (phase[:, None] * W))
        parity = (sum(np.meshgrid(*[np.arange(d) for d in system.dims], indexing="ij")) % 2).ravel()
        self.blocks = [np.flatnonzero(parity == p) for p in (0, 1)]
        self._eig: dict[float, list] = {}

    def _apply_modes(self, V: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
        for axis, M in enumerate(mats):
            V = np.moveaxis(np.tensordot(M, V, axes=(1, axis + 1)), 0, axis + 1)
        return V

    def to_q(self, V):
        return self._apply_modes(V, [W.T for W in self.q_vectors])

    def from_q(self, V):
        return self._apply_modes(V, self.q_vectors)

    def split_step(self, Vq: np.ndarray, chi: float) -> np.ndarray:
        kick = np.exp(-0.5j * chi * self.dt * self.coupling_grid)
        Vq = Vq * kick
        Vq = self._apply_modes(Vq, self.free_q)
        return Vq * kick

    def exact(self, V: np.ndarray, chi: float, duration: float) -> np.ndarray:
        if chi == 0.0:
            return V * np.exp(-1j * self.energies * duration)
        if chi not in self._eig:
            H = self.system.hamiltonian(chi)
            self._eig[chi] = [np.linalg.eigh(H[np.ix_(b, b)]) for b in self.blocks]
        K = V.shape[0]
        flat = V.reshape(K, -1)
        out = np.empty_like(flat)
        for b, (evals, evecs) in zip(self.blocks, self._eig[chi]):
            coeff = flat[:, b] @ evecs
            coeff *= np.exp(-1j * evals * duration)
            out[:, b] = coeff @ evecs.T
        return out.reshape(V.shape)


def evolve_exact(system: TruncatedSystem, grid: IntegrationGrid) -> Iterator[EnsembleState]:
    """Yield the ensemble state at each of ``grid.sample_times``.

    ``grid.dt`` is the split-step size used while the switching varies.
    """
    props = _Propagators(system, grid.dt)
    state = initial_ensemble(system)
    V = state.vectors
    weights = state.weights
    k_prev = 0
    for k in grid.sample_steps:
        k = int(k)
        if k > k_prev:
            t = grid.step_time(np.arange(k_prev, k))
            chi_a = np.atleast_1d(system.switching(t))
            chi_m = np.atleast_1d(system.switching(t + 0.5 * grid.dt))
            chi_b = np.atleast_1d(system.switching(t + grid.dt))
            const = (chi_a == chi_m) & (chi_m == chi_b)
            key = np.where(const, chi_a, np.nan)
            same = (key[1:] == key[:-1]) | (np.isnan(key[1:]) & np.isnan(key[:-1]))
            bounds = np.concatenate([[0], np.flatnonzero(~same) + 1, [len(t)]])
            for i, j in zip(bounds[:-1], bounds[1:]):
                if const[i]:
                    V = props.exact(V, float(chi_a[i]), (j - i) * grid.dt)
                else:
                    Vq = props.to_q(V)
                    for chi in chi_m[i:j]:
                        Vq = props.split_step(Vq, float(chi))
                    V = props.from_q(Vq)
        k_prev = k
        yield EnsembleState(V, weights, float(grid.step_time(k)))


@dataclass(frozen=True)
class ExactObservables:
    t: float
    S_sys: float
    S_env: float
    S_joint: float
    mi_sys_env: float
    zeta: float
    rel_entropy: float
    E_env: float
    leakage: float
    purity: float


def _mode_energy(rho: np.ndarray, omega: float) -> float:
    return float(omega * np.sum(np.arange(rho.shape[0]) * np.real(np.diag(rho))))


def observables_exact(state: EnsembleState, initial: EnsembleState, system: TruncatedSystem) -> ExactObservables:
    """Entropies, mutual information, entropy production and bath relative entropy."""
    sys_modes, env_modes = system.system, system.environment
    beta = 1.0 / system.env_temperature

    def summary(st: EnsembleState):
        rho_s = st.reduced(sys_modes)
        rho_e = st.reduced(env_modes)
        energy = sum(
            _mode_energy(st.reduced([i]), system.frequencies[i]) for i in env_modes
        )
        return von_neumann(rho_s), von_neumann(rho_e), energy

    S_s, S_e, E_e = summary(state)
    S_s0, S_e0, E_e0 = summary(initial)
    spectrum = state.joint_spectrum()
    S_joint = von_neumann(spectrum)
    leakage = max(float(np.real(state.reduced([i])[-1, -1])) for i in range(system.n_modes))
    return ExactObservables(
        t=state.t,
        S_sys=S_s,
        S_env=S_e,
        S_joint=S_joint,
        mi_sys_env=S_s + S_e - S_joint,
        zeta=beta * (E_e - E_e0) - (S_s0 - S_s),
        rel_entropy=beta * (E_e - E_e0) - (S_e - S_e0),
        E_env=E_e,
        leakage=leakage,
        purity=float(np.sum(spectrum**2)),
    )


def run_oracle(system: TruncatedSystem, grid: IntegrationGrid, leakage_limit: float = LEAKAGE_LIMIT) -> list[ExactObservables]:
    """Evolve and evaluate observables at each sample, enforcing the cutoff gate."""
    initial = initial_ensemble(system)
    out = []
    for state in evolve_exact(system, grid):
        trace = float(np.sum(state.weights * np.sum(np.abs(state.vectors) ** 2, axis=tuple(range(1, state.vectors.ndim)))))
        if abs(trace - 1.0) > 1e-10:
            raise NumericalQualityError(f"trace drifted to {trace!r} at t={state.t}")
        obs = observables_exact(state, initial, system)
        if obs.leakage > leakage_limit:
            raise OracleInvalidError(
                f"top Fock level population {obs.leakage:.2e} exceeds {leakage_limit:.0e} at t={obs.t}"
            )
        out.append(obs)
    return out
