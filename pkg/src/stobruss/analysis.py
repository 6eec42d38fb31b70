"""Lyapunov-exponent estimation, modal projection and noise-intensity sweeps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DegenerateTrajectoryError, InvalidArgumentError
from .model import BrusselatorParams, linearize
from .sde import (
    FieldState,
    FieldTrajectory,
    SpatialGrid,
    TimeGrid,
    simulate_field_ensemble,
    simulate_modes_ensemble,
)
from .spectral import (
    EigenMode,
    certified_decay_rate,
    mode_matrices,
    neumann_eigenpairs,
    spectral_abscissa,
)

MIN_FIT_POINTS = 10
DEFAULT_WINDOW_FRACTION = 0.3
Z95 = 1.959963984540054


@dataclass(frozen=True)
class LyapunovEstimate:
    slope: float
    intercept: float
    stderr: float
    fit_window: tuple[float, float]
    n_points: int


@dataclass(frozen=True)
class EnsembleLyapunov:
    """Slopes fitted member by member, with a normal-approximation 95% CI."""

    estimates: np.ndarray = field(repr=False)
    fit_window: tuple[float, float]

    @property
    def n_realizations(self) -> int:
        return int(self.estimates.size)

    @property
    def mean(self) -> float:
        return float(np.mean(self.estimates))

    @property
    def std(self) -> float:
        if self.estimates.size < 2:
            return 0.0
        return float(np.std(self.estimates, ddof=1))

    @property
    def ci95_halfwidth(self) -> float:
        return Z95 * self.std / math.sqrt(self.n_realizations)


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    mean_lyapunov: float
    ci95_halfwidth: float
    n_realizations: int
    theoretical_bound: float | None = None


@dataclass(frozen=True)
class ModeExponent:
    k: int
    mu: float
    lambda_re_max_det: float
    lyapunov: EnsembleLyapunov


def log_norm_series(traj: FieldTrajectory):
    """``(times, ln(|u - u_ref| + |v - v_ref|))`` of a recorded trajectory."""
    norms = np.asarray(traj.l2_norms, dtype=float)
    if np.any(norms <= 0):
        j = int(np.flatnonzero(norms <= 0)[0])
        raise DegenerateTrajectoryError(f"trajectory reached the reference state at t={traj.times[j]}")
    return np.asarray(traj.times), np.log(norms)


def default_window(times) -> tuple[float, float]:
    t_end = float(times[-1])
    return DEFAULT_WINDOW_FRACTION * t_end, t_end


def _window_mask(times, window):
    t0, t1 = window
    if not t0 < t1:
        raise InvalidArgumentError(f"empty fit window {window}")
    mask = (times >= t0 - 1e-12) & (times <= t1 + 1e-12)
    n = int(mask.sum())
    if n < MIN_FIT_POINTS:
        raise InvalidArgumentError(f"only {n} samples in fit window {window}; need {MIN_FIT_POINTS}")
    return mask


def fit_slopes(times, values, window=None):
    """Least-squares slopes of ``values`` (time along axis 0) over ``window``.

    Returns ``(slope, intercept, stderr, n_points)``; the first three carry the
    trailing shape of ``values``.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = default_window(times)
    mask = _window_mask(times, window)
    t = times[mask]
    y = values[mask]
    n = t.size
    tc = t - t.mean()
    sxx = float(tc @ tc)
    ybar = y.mean(axis=0)
    yc = y - ybar
    slope = np.tensordot(tc, yc, axes=(0, 0)) / sxx
    intercept = ybar - slope * t.mean()
    resid = yc - np.multiply.outer(tc, slope)
    ssr = np.sum(resid * resid, axis=0)
    stderr = np.sqrt(np.maximum(ssr, 0.0) / (n - 2) / sxx)
    return slope, intercept, stderr, n


def fit_lyapunov(times, values, window=None) -> LyapunovEstimate:
    """Ordinary least-squares growth rate of a log-norm series."""
    times = np.asarray(times, dtype=float)
    if window is None:
        window = default_window(times)
    slope, intercept, stderr, n = fit_slopes(times, values, window)
    if not np.isfinite(slope):
        raise InvalidArgumentError("non-finite slope; series contains non-finite values in the window")
    return LyapunovEstimate(float(slope), float(intercept), float(stderr),
                            (float(window[0]), float(window[1])), n)


def ensemble_lyapunov(times, log_norms, window=None) -> EnsembleLyapunov:
    """Fit each column of ``log_norms`` (shape (n_times, n_members))."""
    times = np.asarray(times, dtype=float)
    if window is None:
        window = default_window(times)
    slope, _, _, _ = fit_slopes(times, log_norms, window)
    return EnsembleLyapunov(np.atleast_1d(slope), (float(window[0]), float(window[1])))


# ---------------------------------------------------------------------------
# Modal projection


def _basis(modes: Sequence[EigenMode], grid: SpatialGrid) -> np.ndarray:
    if len(modes) > grid.N:
        raise InvalidArgumentError(f"{len(modes)} modes cannot be resolved on {grid.N} cells")
    x = grid.nodes
    return np.stack([m.phi(x) for m in modes])


def project_modes(state: FieldState, modes: Sequence[EigenMode], grid: SpatialGrid):
    """Midpoint-rule coefficients ``g_k = dx sum_i u_i phi_k(x_i)`` and ``h_k``."""
    P = _basis(modes, grid)
    return grid.dx * (P @ state.u), grid.dx * (P @ state.v)


def reconstruct_field(g, h, modes: Sequence[EigenMode], grid: SpatialGrid, t: float = 0.0) -> FieldState:
    P = _basis(modes, grid)
    return FieldState(np.asarray(g) @ P, np.asarray(h) @ P, t)


# ---------------------------------------------------------------------------
# Ensembles and sweeps


def per_mode_lyapunov(params: BrusselatorParams, noise, modes: Sequence[EigenMode], tg: TimeGrid,
                      n_realizations: int = 100, base_seed: int = 0, window=None,
                      V0=(1.0, 1.0), renorm_threshold: float = 1e6, record_stride: int = 10,
                      threads: int | None = None) -> list[ModeExponent]:
    """Ensemble Lyapunov exponent of each mode SDE, simulated directly."""
    if n_realizations < 1:
        raise InvalidArgumentError("n_realizations must be >= 1")
    su, sv = noise
    co = linearize(params)
    mms = [mode_matrices(co, params.d_u, params.d_v, su, sv, m) for m in modes]
    times, s = simulate_modes_ensemble(mms, V0, tg, n_realizations, base_seed, renorm_threshold,
                                       record_stride, threads)
    if window is None:
        window = default_window(times)
    slopes, _, _, _ = fit_slopes(times, s, window)  # shape (K, R)
    det = spectral_abscissa(params, 0.0, modes)
    return [
        ModeExponent(m.k, m.mu, float(det[i]), EnsembleLyapunov(slopes[i], tuple(window)))
        for i, m in enumerate(modes)
    ]


SWEEP_AXES = ("same", "sigma_v")


def _noise_for(axis: str, value: float) -> tuple[float, float]:
    if axis == "same":
        return value, value
    if axis == "sigma_v":
        return 0.0, value
    raise InvalidArgumentError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def field_lyapunov(params: BrusselatorParams, noise, grid: SpatialGrid, tg: TimeGrid,
                   n_realizations: int = 100, base_seed: int = 0, window=None,
                   init_kind: str = "linear-perturbation", amplitude: float = 0.1,
                   threads: int | None = None) -> EnsembleLyapunov:
    """Lyapunov exponent of the linearised field, one fit per realisation."""
    ens = simulate_field_ensemble("linear", params, noise, grid, tg, n_realizations, base_seed,
                                  init_kind=init_kind, amplitude=amplitude, threads=threads)
    norms = ens.l2_norms
    if np.any(norms <= 0):
        raise DegenerateTrajectoryError("a linear trajectory reached the origin")
    return ensemble_lyapunov(ens.times, np.log(norms), window)


def dominant_mode(params: BrusselatorParams, K: int = 200, L: float = 1.0) -> EigenMode:
    modes = neumann_eigenpairs(L, K)
    return modes[int(np.argmax(spectral_abscissa(params, 0.0, modes)))]


def sigma_sweep(params: BrusselatorParams, sweep_axis: str, values: Sequence[float], tg: TimeGrid,
                n_realizations: int = 100, base_seed: int = 0, use_field: bool = True,
                grid: SpatialGrid | None = None, window=None, K: int = 200,
                threads: int | None = None) -> list[SweepRow]:
    """Ensemble Lyapunov exponent for each noise intensity in ``values``.

    ``sweep_axis="same"`` sets ``sigma_u = sigma_v = value``; ``"sigma_v"``
    sets ``sigma_u = 0``. With ``use_field`` the linearised field is
    simulated, otherwise only the deterministically dominant mode.
    """
    if len(values) == 0:
        raise InvalidArgumentError("no sweep values")
    if grid is None:
        grid = SpatialGrid(1.0, 50)
    mode = None if use_field else dominant_mode(params, K, grid.L)
    rows = []
    for value in values:
        noise = _noise_for(sweep_axis, float(value))
        if use_field:
            est = field_lyapunov(params, noise, grid, tg, n_realizations, base_seed, window,
                                 threads=threads)
        else:
            est = per_mode_lyapunov(params, noise, [mode], tg, n_realizations, base_seed, window,
                                    threads=threads)[0].lyapunov
        bound = None
        if sweep_axis == "same" and params.in_stable_regime:
            omega = certified_decay_rate(params, value)
            bound = None if omega is None else -omega
        rows.append(SweepRow(float(value), est.mean, est.ci95_halfwidth, est.n_realizations, bound))
    return rows


def sign_change_brackets(rows: Sequence[SweepRow]) -> list[tuple[float, float]]:
    """Consecutive sweep values between which the mean exponent changes sign."""
    out = []
    for r0, r1 in zip(rows[:-1], rows[1:]):
        if (r0.mean_lyapunov > 0) != (r1.mean_lyapunov > 0):
            out.append((r0.sigma, r1.sigma))
    return out


def theoretical_bound_curve(params: BrusselatorParams, sigmas) -> list[tuple[float, float | None]]:
    """``(sigma, -omega(sigma))`` pairs; ``None`` where no bound applies."""
    out = []
    for s in sigmas:
        omega = certified_decay_rate(params, s) if params.in_stable_regime else None
        out.append((float(s), None if omega is None else -omega))
    return out
