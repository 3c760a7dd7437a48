r"""Linear algebra for zero-mean bosonic Gaussian states.

Phase space is ordered ``(q_1, p_1, ..., q_N, p_N)``. Covariance matrices are
:math:`\sigma_{ab} = \langle x_a x_b + x_b x_a \rangle`, so the vacuum is the
identity and a thermal mode of frequency :math:`\omega` at temperature
:math:`T` has symplectic eigenvalue :math:`\coth(\omega / 2T)`. Covariance
matrices are plain ``numpy`` arrays; most functions also accept stacks of
matrices with shape ``(..., 2N, 2N)``. Entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag, schur
from scipy.special import xlogy

from .errors import InstabilityError, InvalidDimensionError, InvalidStateError

EPS_PSD = 1e-9
EPS_NUM = 1e-8
EPS_SYMP = 1e-8

_SYMMETRY_RTOL = 1e-10


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with ``n_modes`` copies of ``[[0, 1], [-1, 0]]``."""
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidDimensionError(f"n_modes must be a positive integer, got {n_modes!r}")
    return np.kron(np.eye(int(n_modes)), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def n_modes_of(matrix: np.ndarray) -> int:
    dim = np.shape(matrix)[-1]
    if np.ndim(matrix) < 2 or np.shape(matrix)[-2] != dim or dim % 2 or dim == 0:
        raise InvalidDimensionError(f"expected a (2N, 2N) matrix, got shape {np.shape(matrix)}")
    return dim // 2


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + np.swapaxes(matrix, -1, -2))


def _require_symmetric(sigma: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(sigma))))
    if np.max(np.abs(sigma - np.swapaxes(sigma, -1, -2))) > _SYMMETRY_RTOL * scale:
        raise InvalidStateError("covariance matrix is not symmetric")


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H = x^T F x`` together with a system/environment split of the modes.

    ``system`` and ``environment`` hold 0-based mode indices. Either may be
    empty for a Hamiltonian that only describes one side.
    """

    F: np.ndarray
    system: tuple[int, ...] = ()
    environment: tuple[int, ...] = field(default=())

    def __post_init__(self):
        F = np.array(self.F, dtype=float)
        n = n_modes_of(F)
        F.setflags(write=False)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "system", tuple(int(i) for i in self.system))
        object.__setattr__(self, "environment", tuple(int(i) for i in self.environment))
        labelled = self.system + self.environment
        if len(set(labelled)) != len(labelled) or any(not 0 <= i < n for i in labelled):
            raise InvalidDimensionError("partition indices must be distinct and within range")

    @property
    def n_modes(self) -> int:
        return self.F.shape[0] // 2

    @property
    def F_s(self) -> np.ndarray:
        """``F + F^T``, the matrix that generates the dynamics."""
        return self.F + self.F.T


def _as_matrix(F) -> np.ndarray:
    return F.F if isinstance(F, QuadraticHamiltonian) else np.asarray(F, dtype=float)


def symplectic_eigenvalues(sigma: np.ndarray, check: bool = True) -> np.ndarray:
    """Symplectic eigenvalues of ``sigma`` sorted in descending order.

    These are the moduli of the eigenvalues of ``i Omega sigma``, one value
    per mode. Stacks of matrices give an array of shape ``(..., N)``.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = n_modes_of(sigma)
    if check:
        _require_symmetric(sigma)
    omega = symplectic_form(n)
    try:
        # sigma = L L^T  =>  Omega sigma ~ L^T Omega L, which is antisymmetric
        L = np.linalg.cholesky(symmetrize(sigma))
        anti = np.swapaxes(L, -1, -2) @ omega @ L
        vals = np.linalg.eigvalsh(1j * anti)[..., n:]
    except np.linalg.LinAlgError:
        # not positive definite: fall back to the generic eigensolver
        vals = np.sort(np.abs(np.linalg.eigvals(1j * omega @ sigma)), axis=-1)[..., 1::2]
    return vals[..., ::-1]


def williamson(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Williamson decomposition of a positive-definite matrix.

    Returns ``(S, nu)`` with ``S`` symplectic and
    ``S @ sigma @ S.T == diag(nu_1, nu_1, ..., nu_N, nu_N)``, ``nu`` descending.
    """
    sigma = symmetrize(np.asarray(sigma, dtype=float))
    n = n_modes_of(sigma)
    evals, evecs = np.linalg.eigh(sigma)
    if evals[0] <= 0:
        raise InstabilityError("matrix is not positive definite")
    inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.T
    anti = inv_sqrt @ symplectic_form(n) @ inv_sqrt
    T, O = schur(0.5 * (anti - anti.T), output="real")

    t_vals = np.empty(n)
    order = np.empty(2 * n, dtype=int)
    pairs = []
    i = 0
    while i < 2 * n:
        # 2x2 blocks of the form [[0, t], [-t, 0]]; flip columns when t < 0
        t = T[i, i + 1]
        pairs.append((abs(t), (i, i + 1) if t > 0 else (i + 1, i)))
        i += 2
    pairs.sort(key=lambda p: p[0])  # nu = 1/t, so ascending t is descending nu
    for k, (t, cols) in enumerate(pairs):
        t_vals[k] = t
        order[2 * k : 2 * k + 2] = cols
    O = O[:, order]
    nu = 1.0 / t_vals
    S = np.repeat(np.sqrt(nu), 2)[:, None] * (O.T @ inv_sqrt)
    return S, nu


def entropy_function(nu) -> np.ndarray:
    """Von Neumann entropy of a single mode with symplectic eigenvalue ``nu``.

    Values below one (within roundoff) are treated as pure.
    """
    nu = np.maximum(np.asarray(nu, dtype=float), 1.0)
    plus = 0.5 * (nu + 1.0)
    minus = 0.5 * (nu - 1.0)
    minus = np.where(minus < 1e-12, 0.0, minus)
    return xlogy(plus, plus) - xlogy(minus, minus)


def check_state(sigma: np.ndarray, tol: float = EPS_PSD) -> np.ndarray:
    """Validate a covariance matrix; returns its symplectic eigenvalues."""
    nu = symplectic_eigenvalues(sigma)
    if np.min(nu) < 1.0 - tol:
        raise InvalidStateError(
            f"uncertainty principle violated: min symplectic eigenvalue {np.min(nu):.3e}"
        )
    return nu


def entropy(sigma: np.ndarray) -> float | np.ndarray:
    """Von Neumann entropy (nats) of a Gaussian state."""
    nu = symplectic_eigenvalues(sigma)
    if np.min(nu) < 1.0 - EPS_PSD:
        raise InvalidStateError(f"symplectic eigenvalue {np.min(nu):.6g} < 1")
    s = entropy_function(nu).sum(axis=-1)
    return float(s) if np.ndim(s) == 0 else s


def _mode_indices(modes: Sequence[int], n: int) -> np.ndarray:
    modes = np.atleast_1d(np.asarray(modes, dtype=int))
    if modes.size == 0:
        raise InvalidDimensionError("mode subset must be non-empty")
    if np.any(modes < 0) or np.any(modes >= n):
        raise InvalidDimensionError(f"mode index out of range for {n} modes: {modes.tolist()}")
    if len(set(modes.tolist())) != modes.size:
        raise InvalidDimensionError("mode subset contains duplicates")
    return np.stack([2 * modes, 2 * modes + 1], axis=-1).ravel()


def reduced_state(sigma: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    """Covariance matrix of the listed modes (partial trace over the rest)."""
    idx = _mode_indices(modes, n_modes_of(sigma))
    return sigma[..., idx[:, None], idx]


def mutual_information(sigma: np.ndarray, part_a: Sequence[int], part_b: Sequence[int] | None = None):
    """``S(A) + S(B) - S(AB)`` in nats.

    ``part_b`` defaults to the complement of ``part_a``. If ``A`` and ``B``
    together do not cover every mode the remaining modes are traced out first.
    """
    n = n_modes_of(sigma)
    a = [int(i) for i in np.atleast_1d(part_a)]
    b = [i for i in range(n) if i not in a] if part_b is None else [int(i) for i in np.atleast_1d(part_b)]
    if set(a) & set(b):
        raise InvalidDimensionError("partition blocks overlap")
    return (
        entropy(reduced_state(sigma, a))
        + entropy(reduced_state(sigma, b))
        - entropy(reduced_state(sigma, a + b))
    )


def mean_energy(F, sigma: np.ndarray):
    """Mean energy ``<x^T F x> = Tr[(F_s / 2) sigma] / 2``.

    Uses the symmetric part of ``F``, so an asymmetric but equivalent ``F``
    gives the same value.
    """
    F = _as_matrix(F)
    sigma = np.asarray(sigma, dtype=float)
    if F.shape[-1] != sigma.shape[-1] or F.shape[-2] != sigma.shape[-2]:
        raise InvalidDimensionError(f"dimension mismatch: F {F.shape} vs sigma {sigma.shape}")
    e = 0.5 * np.einsum("ij,...ji->...", symmetrize(F), sigma)
    return float(e) if np.ndim(e) == 0 else e


def thermal_nu(omega, temperature):
    """``coth(omega / 2T)``; equal to 1 at ``T = 0``."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise InstabilityError("thermal occupation needs positive frequencies")
    if np.any(np.asarray(temperature) < 0):
        raise ValueError("temperature must be non-negative")
    if np.all(np.asarray(temperature) == 0):
        return np.ones_like(omega)
    with np.errstate(divide="ignore"):
        x = omega / (2.0 * np.asarray(temperature, dtype=float))
    return 1.0 / np.tanh(x)


def normal_modes(F) -> tuple[np.ndarray, np.ndarray]:
    """Symplectic normal-mode transform of a stable quadratic Hamiltonian.

    Returns ``(S, freqs)`` with ``S`` symplectic and
    ``S.T @ F_s @ S == diag(w_1, w_1, ..., w_N, w_N)``, so that ``x = S y``
    turns ``H`` into ``sum_k w_k (q_k^2 + p_k^2) / 2``. Frequencies are
    sorted descending.
    """
    F_s = 2.0 * symmetrize(_as_matrix(F))
    n_modes_of(F_s)
    if np.linalg.eigvalsh(F_s)[0] <= 0:
        raise InstabilityError("quadratic form is not positive definite")
    S, freqs = williamson(F_s)
    return S.T, freqs


def thermal_state(F, temperature: float) -> np.ndarray:
    """Gibbs state of ``H = x^T F x`` at the given temperature."""
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    S, freqs = normal_modes(F)
    nu = thermal_nu(freqs, temperature)
    return symmetrize((S * np.repeat(nu, 2)) @ S.T)


def direct_sum(*blocks: np.ndarray) -> np.ndarray:
    return block_diag(*blocks)
