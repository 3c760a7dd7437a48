"""Post-processing of sampled time series: extrema, plateaus and fronts."""

from __future__ import annotations

import numpy as np
from scipy.signal import find_peaks


def local_extrema(y, prominence: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Indices of interior local maxima and minima."""
    y = np.asarray(y, dtype=float)
    kw = {"prominence": prominence} if prominence > 0 else {}
    maxima, _ = find_peaks(y, **kw)
    minima, _ = find_peaks(-y, **kw)
    return maxima, minima


def is_oscillatory(y, prominence: float = 0.0) -> bool:
    """True when an interior maximum is followed by an interior minimum."""
    maxima, minima = local_extrema(y, prominence)
    return bool(maxima.size and minima.size and minima.max() > maxima.min())


def longest_run(mask) -> tuple[int, int] | None:
    """``(start, stop)`` of the longest run of ``True`` (stop exclusive), or None."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return None
    edges = np.diff(np.concatenate([[0], mask.astype(np.int8), [0]]))
    starts, stops = np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)
    k = int(np.argmax(stops - starts))
    return int(starts[k]), int(stops[k])


def plateau(t, y, target: float, rtol: float, window: tuple[float, float] | None = None):
    """Longest stretch where ``|y - target| < rtol * |target|``.

    ``nan`` entries count as outside the band. Returns ``(t_start, t_end)`` or
    None; ``window`` restricts the search to a time interval.
    """
    t, y = np.asarray(t, dtype=float), np.asarray(y, dtype=float)
    with np.errstate(invalid="ignore"):
        mask = np.abs(y - target) < rtol * abs(target)
    if window is not None:
        mask &= (t >= window[0]) & (t <= window[1])
    run = longest_run(mask)
    if run is None:
        return None
    return float(t[run[0]]), float(t[run[1] - 1])


def first_peak_time(t, y, prominence_fraction: float = 0.1) -> float | None:
    """Time of the first peak of ``y - y[0]`` with prominence above a fraction of its range."""
    y = np.asarray(y, dtype=float)
    rise = y - y[0]
    scale = np.max(np.abs(rise))
    if scale == 0:
        return None
    peaks, _ = find_peaks(rise, prominence=prominence_fraction * scale)
    return float(np.asarray(t)[peaks[0]]) if peaks.size else None


def dispersion(omega: float, alpha: float, q):
    """``sqrt(omega (omega + 2 alpha cos q))`` for wavenumber ``q`` (lattice spacing 1)."""
    return np.sqrt(omega * (omega + 2 * alpha * np.cos(q)))


def max_group_velocity(omega: float, alpha: float, n_points: int = 20001) -> float:
    """Largest ``|d omega / d q|`` of the ring dispersion, by finite differences on a fine grid."""
    q = np.linspace(-np.pi, np.pi, n_points)
    return float(np.max(np.abs(np.gradient(dispersion(omega, alpha, q), q))))


def front_speed(distances, arrival_times) -> float:
    """Inverse slope of a least-squares fit of arrival time against distance."""
    slope, _ = np.polyfit(np.asarray(distances, float), np.asarray(arrival_times, float), 1)
    return float(1.0 / slope)


def empirical_order(differences, floor: float) -> float | None:
    """Convergence order from successive step-halving differences.

    ``differences[k]`` is the change between step sizes ``h/2^k`` and
    ``h/2^(k+1)``. Uses the finest consecutive pair whose values both stay
    above ``floor`` (below it roundoff dominates). None if no such pair exists.
    """
    d = np.asarray(differences, dtype=float)
    for k in range(len(d) - 2, -1, -1):
        if d[k] > floor and d[k + 1] > floor:
            return float(np.log2(d[k] / d[k + 1]))
    return None
