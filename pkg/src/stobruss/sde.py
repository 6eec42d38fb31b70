"""Euler-Maruyama integration of the mode SDEs and the 1-D field equations.

All fields share one scalar Wiener process across species and space. The
spatial operator is the cell-centred three-point Laplacian with reflecting
ghost cells, so sampled Neumann cosines are exact discrete eigenvectors.

Ensemble runners advance many members at once along a leading batch axis.
Every kernel is elementwise along that axis, so a member's trajectory is
bitwise identical whether it is integrated alone or inside any batch.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConfigError, IntegrationFault, InvalidArgumentError
from .model import BrusselatorParams, equilibrium, linearize, reaction_terms
from .spectral import ModeMatrices

THREADS_ENV = "STOBRUSS_THREADS"
CFL_LIMIT = 0.5


# ---------------------------------------------------------------------------
# Grids, seeds, noise


@dataclass(frozen=True)
class SpatialGrid:
    L: float = 1.0
    N: int = 50

    def __post_init__(self):
        if not self.L > 0:
            raise InvalidArgumentError(f"L must be > 0, got {self.L!r}")
        if int(self.N) != self.N or self.N < 3:
            raise InvalidArgumentError(f"N must be an integer >= 3, got {self.N!r}")

    @classmethod
    def from_spacing(cls, L: float, dx: float) -> "SpatialGrid":
        if not dx > 0:
            raise InvalidArgumentError(f"dx must be > 0, got {dx!r}")
        N = int(round(L / dx))
        if abs(N * dx - L) > 1e-9 * L:
            raise InvalidArgumentError(f"dx={dx!r} does not divide L={L!r}")
        return cls(L, N)

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.N) + 0.5) * self.dx


@dataclass(frozen=True)
class TimeGrid:
    T: float = 50.0
    dt: float = 0.005

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidArgumentError(f"dt must be > 0, got {self.dt!r}")
        if not self.T > 0:
            raise InvalidArgumentError(f"T must be > 0, got {self.T!r}")
        n = self.n_steps
        if n < 1 or abs(n * self.dt - self.T) > n * math.ulp(self.T):
            raise InvalidArgumentError(f"dt={self.dt!r} does not divide T={self.T!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def times(self, stride: int = 1) -> np.ndarray:
        return np.arange(0, self.n_steps + 1, stride) * self.dt


def member_seeds(base_seed: int, member: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``(noise_seed, init_seed)`` for ensemble member ``member``."""
    return (int(base_seed), int(member), 0), (int(base_seed), int(member), 1)


@dataclass(frozen=True)
class NoisePath:
    seed: object
    dt: float
    increments: np.ndarray = field(repr=False)

    @property
    def W(self) -> np.ndarray:
        """Brownian path at the grid instants, starting from ``W_0 = 0``."""
        return np.concatenate([[0.0], np.cumsum(self.increments)])

    def coarsen(self, factor: int) -> "NoisePath":
        """Increments of the same path on a grid ``factor`` times coarser."""
        n = self.increments.size
        if factor < 1 or n % factor:
            raise InvalidArgumentError(f"cannot coarsen {n} increments by {factor}")
        coarse = self.increments.reshape(-1, factor).sum(axis=1)
        return NoisePath(self.seed, self.dt * factor, coarse)


def sample_noise_path(tg: TimeGrid, seed) -> NoisePath:
    """I.i.d. ``Normal(0, dt)`` increments from a PCG64 stream keyed by ``seed``."""
    rng = np.random.default_rng(seed)
    return NoisePath(seed, tg.dt, rng.normal(0.0, math.sqrt(tg.dt), tg.n_steps))


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _chunks(n: int, parts: int) -> list[slice]:
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).round().astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run_chunked(fn: Callable[[slice], object], n: int, threads: int | None):
    threads = thread_count() if threads is None else threads
    parts = _chunks(n, threads)
    if len(parts) == 1:
        return [fn(parts[0])]
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        return list(pool.map(fn, parts))


# ---------------------------------------------------------------------------
# Mode SDEs


def em_step_mode(V, mm: ModeMatrices, dW: float, dt: float) -> np.ndarray:
    """One explicit Euler-Maruyama step of ``dV = A_k V dt + Bn V dW``."""
    g, h = float(V[0]), float(V[1])
    A = mm.A_k
    with np.errstate(over="ignore", invalid="ignore"):
        g2, h2 = _mode_kernel(g, h, A[0, 0], A[0, 1], A[1, 0], A[1, 1], mm.sigma_u, mm.sigma_v, dW, dt)
    out = np.array([g2, h2])
    if not np.all(np.isfinite(out)):
        raise IntegrationFault(f"mode {mm.k}: non-finite state after Euler-Maruyama step", location=mm.k)
    return out


def _mode_kernel(g, h, a11, a12, a21, a22, su, sv, dW, dt):
    return (
        g + (a11 * g + a12 * h) * dt + su * g * dW,
        h + (a21 * g + a22 * h) * dt + sv * h * dW,
    )


def em_mode_terminal(mm: ModeMatrices, V0, dW, dt: float) -> np.ndarray:
    """Terminal Euler-Maruyama states for a batch of paths.

    ``dW`` has shape (R, n); returns an (R, 2) array.
    """
    A = mm.A_k
    V0 = np.asarray(V0, dtype=float)
    R, n = dW.shape
    g = np.full(R, V0[0])
    h = np.full(R, V0[1])
    for j in range(n):
        g, h = _mode_kernel(g, h, A[0, 0], A[0, 1], A[1, 0], A[1, 1], mm.sigma_u, mm.sigma_v,
                            dW[:, j], dt)
    out = np.stack([g, h], axis=1)
    if not np.all(np.isfinite(out)):
        raise IntegrationFault(f"mode {mm.k}: non-finite terminal state", location=mm.k)
    return out


@dataclass(frozen=True)
class ModeLogTrajectory:
    k: int
    times: np.ndarray
    log_norms: np.ndarray


def _integrate_modes(A, su, sv, V0, dW, dt, renorm_threshold, record_stride):
    """Batched mode integration.

    ``A`` has shape (K, 2, 2), ``dW`` shape (R, n). Returns log-magnitudes of
    shape (n_rec, K, R) at steps ``0, stride, 2 stride, ...``.
    """
    K = A.shape[0]
    R, n = dW.shape
    a11 = A[:, 0, 0][:, None]
    a12 = A[:, 0, 1][:, None]
    a21 = A[:, 1, 0][:, None]
    a22 = A[:, 1, 1][:, None]
    V0 = np.asarray(V0, dtype=float)
    n0 = math.hypot(V0[0], V0[1])
    g = np.full((K, R), V0[0] / n0)
    h = np.full((K, R), V0[1] / n0)
    logacc = np.full((K, R), math.log(n0))
    lo, hi = 1.0 / renorm_threshold, renorm_threshold
    rec = np.empty((n // record_stride + 1, K, R))
    rec[0] = logacc
    j_rec = 1
    for j in range(n):
        w = dW[:, j][None, :]
        g, h = _mode_kernel(g, h, a11, a12, a21, a22, su, sv, w, dt)
        nrm = np.hypot(g, h)
        if not np.all(np.isfinite(nrm)):
            kk, rr = np.argwhere(~np.isfinite(nrm))[0]
            raise IntegrationFault(
                f"non-finite mode state at step {j + 1} (mode index {kk}, member {rr})",
                step=j + 1, time=(j + 1) * dt, location=(int(kk), int(rr)),
            )
        out = (nrm < lo) | (nrm > hi)
        if out.any():
            if (nrm[out] == 0).any():
                raise IntegrationFault(f"mode state collapsed to zero at step {j + 1}", step=j + 1)
            scale = np.where(out, nrm, 1.0)
            g = g / scale
            h = h / scale
            logacc = logacc + np.log(scale)
        if (j + 1) % record_stride == 0:
            rec[j_rec] = logacc + np.log(np.hypot(g, h))
            j_rec += 1
    return rec


def simulate_mode(mm: ModeMatrices, V0, tg: TimeGrid, seed=0, renorm_threshold: float = 1e6,
                  noise: NoisePath | None = None) -> ModeLogTrajectory:
    """Log-magnitude ``ln|V(t_j)|`` of one mode path with renormalisation.

    Whenever ``|V|`` leaves ``[1/renorm_threshold, renorm_threshold]`` the
    state is rescaled to unit length and the discarded log-magnitude is
    carried in an accumulator.
    """
    V0 = np.asarray(V0, dtype=float)
    if V0.shape != (2,) or not np.any(V0 != 0):
        raise InvalidArgumentError("V0 must be a non-zero 2-vector")
    if renorm_threshold <= 1:
        raise InvalidArgumentError("renorm_threshold must exceed 1")
    if noise is None:
        noise = sample_noise_path(tg, seed)
    rec = _integrate_modes(mm.A_k[None], mm.sigma_u, mm.sigma_v, V0, noise.increments[None, :],
                           tg.dt, renorm_threshold, 1)
    return ModeLogTrajectory(mm.k, tg.times(), rec[:, 0, 0])


def simulate_modes_ensemble(mms: Sequence[ModeMatrices], V0, tg: TimeGrid, n_members: int,
                            base_seed: int = 0, renorm_threshold: float = 1e6,
                            record_stride: int = 1, threads: int | None = None):
    """Integrate every mode in ``mms`` over ``n_members`` noise paths.

    All modes of member ``r`` are driven by the same Brownian path, the one
    a field simulation of member ``r`` would use. Returns ``(times, s)`` with
    ``s`` of shape (n_rec, K, n_members).
    """
    if not mms:
        raise InvalidArgumentError("no modes given")
    su, sv = mms[0].sigma_u, mms[0].sigma_v
    if any(m.sigma_u != su or m.sigma_v != sv for m in mms):
        raise InvalidArgumentError("all modes must share the noise intensities")
    A = np.stack([m.A_k for m in mms])
    dW = np.stack([sample_noise_path(tg, member_seeds(base_seed, r)[0]).increments
                   for r in range(n_members)])

    def run(sl):
        try:
            return _integrate_modes(A, su, sv, V0, dW[sl], tg.dt, renorm_threshold, record_stride)
        except IntegrationFault as exc:
            k_idx, r_idx = exc.location if isinstance(exc.location, tuple) else (None, None)
            if k_idx is not None:
                raise IntegrationFault(
                    f"mode k={mms[k_idx].k}, realization {sl.start + r_idx}: {exc}",
                    step=exc.step, time=exc.time, location=(mms[k_idx].k, sl.start + r_idx),
                ) from exc
            raise

    parts = _run_chunked(run, n_members, threads)
    return tg.times(record_stride), np.concatenate(parts, axis=2)


# ---------------------------------------------------------------------------
# Fields


@dataclass(frozen=True)
class FieldState:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise IntegrationFault(f"non-finite field state at t={self.t}", time=self.t)


@dataclass
class FieldTrajectory:
    times: np.ndarray
    l2_u: np.ndarray
    l2_v: np.ndarray
    snapshots: list[FieldState]
    final: FieldState
    reference: tuple[float, float] = (0.0, 0.0)

    @property
    def l2_norms(self) -> np.ndarray:
        return self.l2_u + self.l2_v


@dataclass
class EnsembleTrajectory:
    """Batched field runs; norm arrays have shape (n_rec, n_members).

    Members whose integration faulted carry NaN norms from the faulting step
    on and are listed in ``faults``.
    """

    times: np.ndarray
    l2_u: np.ndarray
    l2_v: np.ndarray
    snapshots: dict[float, tuple[np.ndarray, np.ndarray]]
    final_u: np.ndarray
    final_v: np.ndarray
    faults: dict[int, IntegrationFault]
    reference: tuple[float, float] = (0.0, 0.0)

    @property
    def l2_norms(self) -> np.ndarray:
        return self.l2_u + self.l2_v

    @property
    def n_members(self) -> int:
        return self.l2_u.shape[1]

    @property
    def ok(self) -> np.ndarray:
        ok = np.ones(self.n_members, dtype=bool)
        ok[list(self.faults)] = False
        return ok


def laplacian_neumann(w, dx: float) -> np.ndarray:
    """Three-point Laplacian along the last axis with reflecting ghosts.

    Written as a difference of face fluxes with zero flux at both walls, which
    makes the discrete sum telescope.
    """
    w = np.asarray(w, dtype=float)
    if w.shape[-1] < 3:
        raise InvalidArgumentError("need at least 3 cells")
    flux = np.diff(w, axis=-1)
    out = np.empty_like(w)
    out[..., 0] = flux[..., 0]
    out[..., 1:-1] = flux[..., 1:] - flux[..., :-1]
    out[..., -1] = -flux[..., -1]
    return out / (dx * dx)


def _linear_update(u, v, a, b, c, d, d_u, d_v, su, sv, dW, dt, dx, hook=None):
    if hook is not None:
        hook(np.broadcast_to(dW, u.shape), np.broadcast_to(dW, v.shape))
    u_new = u + (d_u * laplacian_neumann(u, dx) + a * u + b * v) * dt + su * u * dW
    v_new = v + (d_v * laplacian_neumann(v, dx) + c * u + d * v) * dt + sv * v * dW
    return u_new, v_new


def _nonlinear_update(u, v, params, ui, vi, su, sv, dW, dt, dx, hook=None):
    if hook is not None:
        hook(np.broadcast_to(dW, u.shape), np.broadcast_to(dW, v.shape))
    f, g = reaction_terms(params, u, v)
    u_new = u + (params.d_u * laplacian_neumann(u, dx) + f) * dt + su * (u - ui) * dW
    v_new = v + (params.d_v * laplacian_neumann(v, dx) + g) * dt + sv * (v - vi) * dW
    return u_new, v_new


def _check_state(u, v, t):
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        bad = np.flatnonzero(~(np.isfinite(u) & np.isfinite(v)))
        i = int(bad[0])
        raise IntegrationFault(
            f"non-finite field at t={t:.6g}, cell {i}", time=t, location=i
        )


def step_linear_field(state: FieldState, coeffs, d_u, d_v, noise, dW, dt, grid: SpatialGrid,
                      hook=None) -> FieldState:
    su, sv = noise
    with np.errstate(over="ignore", invalid="ignore"):
        u, v = _linear_update(state.u, state.v, coeffs.a, coeffs.b, coeffs.c, coeffs.d,
                              d_u, d_v, su, sv, dW, dt, grid.dx, hook)
    _check_state(u, v, state.t + dt)
    return FieldState(u, v, state.t + dt)


def step_nonlinear_field(state: FieldState, params: BrusselatorParams, noise, dW, dt,
                         grid: SpatialGrid, hook=None) -> FieldState:
    su, sv = noise
    ui, vi = equilibrium(params)
    with np.errstate(over="ignore", invalid="ignore"):
        u, v = _nonlinear_update(state.u, state.v, params, ui, vi, su, sv, dW, dt, grid.dx, hook)
    _check_state(u, v, state.t + dt)
    return FieldState(u, v, state.t + dt)


def diffusion_number(params: BrusselatorParams, grid: SpatialGrid, tg: TimeGrid) -> float:
    return max(params.d_u, params.d_v) * tg.dt / grid.dx**2


def check_cfl(params: BrusselatorParams, grid: SpatialGrid, tg: TimeGrid) -> float:
    r = diffusion_number(params, grid, tg)
    if r > CFL_LIMIT:
        raise ConfigError(
            f"explicit diffusion unstable: max(d_u, d_v) dt / dx^2 = {r:.4g} > {CFL_LIMIT}"
        )
    return r


def _l2(w, dx):
    return np.sqrt(dx * np.sum(w * w, axis=-1))


def _integrate_fields(kind, params, noise, grid, tg, u, v, dW, record_stride=1,
                      snapshot_steps=(), on_fault="raise", hook=None):
    """Core batched loop; ``u``, ``v`` of shape (R, N) and ``dW`` of shape (R, n)."""
    su, sv = noise
    dx, dt = grid.dx, tg.dt
    R, n = dW.shape
    if kind == "linear":
        co = linearize(params)
        ui, vi = 0.0, 0.0

        def update(u, v, w):
            return _linear_update(u, v, co.a, co.b, co.c, co.d, params.d_u, params.d_v,
                                  su, sv, w, dt, dx, hook)
    elif kind == "nonlinear":
        ui, vi = equilibrium(params)

        def update(u, v, w):
            return _nonlinear_update(u, v, params, ui, vi, su, sv, w, dt, dx, hook)
    else:
        raise InvalidArgumentError(f"unknown field kind {kind!r}")

    u = np.array(u, dtype=float)
    v = np.array(v, dtype=float)
    n_rec = n // record_stride + 1
    l2_u = np.empty((n_rec, R))
    l2_v = np.empty((n_rec, R))
    l2_u[0] = _l2(u - ui, dx)
    l2_v[0] = _l2(v - vi, dx)
    snaps = {}
    snapshot_steps = set(snapshot_steps)
    if 0 in snapshot_steps:
        snaps[0] = (u.copy(), v.copy())
    faults: dict[int, IntegrationFault] = {}
    alive = np.ones(R, dtype=bool)
    j_rec = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n):
            u, v = update(u, v, dW[:, j:j + 1])
            nu = _l2(u - ui, dx)
            nv = _l2(v - vi, dx)
            bad = alive & ~(np.isfinite(nu) & np.isfinite(nv))
            if bad.any():
                t = (j + 1) * dt
                for r in np.flatnonzero(bad):
                    cells = np.flatnonzero(~(np.isfinite(u[r]) & np.isfinite(v[r])))
                    if cells.size:
                        loc = int(cells[0])
                    else:  # squared norm overflowed while cells are still finite
                        loc = int(np.argmax(np.abs(u[r]) + np.abs(v[r])))
                    fault = IntegrationFault(
                        f"member {r}: non-finite field at t={t:.6g} (step {j + 1}, cell {loc})",
                        step=j + 1, time=t, location=loc,
                    )
                    if on_fault == "raise":
                        raise fault
                    faults[int(r)] = fault
                alive &= ~bad
                # parked at the reference state so dead members stay finite
                u[~alive] = ui
                v[~alive] = vi
            if (j + 1) % record_stride == 0:
                nu = np.where(alive, nu, np.nan)
                nv = np.where(alive, nv, np.nan)
                l2_u[j_rec] = nu
                l2_v[j_rec] = nv
                j_rec += 1
            if (j + 1) in snapshot_steps:
                snaps[j + 1] = (u.copy(), v.copy())
    u[~alive] = np.nan
    v[~alive] = np.nan
    return l2_u, l2_v, snaps, u, v, faults, (ui, vi)


def _snapshot_steps(tg: TimeGrid, snapshot_every=None, snapshot_times=()):
    steps = set()
    if snapshot_every:
        steps.update(range(0, tg.n_steps + 1, int(snapshot_every)))
    for t in snapshot_times:
        j = int(round(t / tg.dt))
        if not 0 <= j <= tg.n_steps:
            raise InvalidArgumentError(f"snapshot time {t} outside [0, {tg.T}]")
        steps.add(j)
    return steps


def simulate_field(kind: str, params: BrusselatorParams, noise, grid: SpatialGrid, tg: TimeGrid,
                   initial: FieldState, seed=0, record_stride: int = 1, snapshot_every=None,
                   snapshot_times=(), noise_path: NoisePath | None = None,
                   hook=None) -> FieldTrajectory:
    """Integrate one field trajectory.

    ``kind`` is ``"linear"`` (deviation equations, norms about 0) or
    ``"nonlinear"`` (full Brusselator, norms about the equilibrium).
    """
    check_cfl(params, grid, tg)
    if record_stride < 1:
        raise InvalidArgumentError("record_stride must be >= 1")
    if noise_path is None:
        noise_path = sample_noise_path(tg, seed)
    steps = _snapshot_steps(tg, snapshot_every, snapshot_times)
    l2_u, l2_v, snaps, u, v, _, ref = _integrate_fields(
        kind, params, noise, grid, tg, initial.u[None, :], initial.v[None, :],
        noise_path.increments[None, :], record_stride, steps, "raise", hook,
    )
    snapshots = [FieldState(su[0], sv[0], j * tg.dt) for j, (su, sv) in sorted(snaps.items())]
    return FieldTrajectory(
        times=tg.times(record_stride), l2_u=l2_u[:, 0], l2_v=l2_v[:, 0], snapshots=snapshots,
        final=FieldState(u[0], v[0], tg.n_steps * tg.dt), reference=ref,
    )


def simulate_field_ensemble(kind: str, params: BrusselatorParams, noise, grid: SpatialGrid,
                            tg: TimeGrid, n_members: int, base_seed: int = 0,
                            init_kind: str | None = None, amplitude: float = 0.1,
                            record_stride: int = 1, snapshot_times=(), snapshot_every=None,
                            on_fault: str = "raise", threads: int | None = None) -> EnsembleTrajectory:
    """Run ``n_members`` independent realisations keyed by ``(base_seed, r)``.

    Member ``r`` draws its initial data and its noise path from its own
    streams, so results do not depend on the chunking across threads.
    ``on_fault="mask"`` records faulting members instead of aborting.
    """
    check_cfl(params, grid, tg)
    if n_members < 1:
        raise InvalidArgumentError("n_members must be >= 1")
    if on_fault not in ("raise", "mask"):
        raise InvalidArgumentError(f"on_fault must be 'raise' or 'mask', got {on_fault!r}")
    if init_kind is None:
        init_kind = "paper-nonlinear" if kind == "nonlinear" else "linear-perturbation"
    steps = _snapshot_steps(tg, snapshot_every, snapshot_times)
    inits = [initial_condition(init_kind, params, grid, member_seeds(base_seed, r)[1], amplitude)
             for r in range(n_members)]
    u0 = np.stack([s.u for s in inits])
    v0 = np.stack([s.v for s in inits])
    dW = np.stack([sample_noise_path(tg, member_seeds(base_seed, r)[0]).increments
                   for r in range(n_members)])

    def run(sl):
        try:
            return sl, _integrate_fields(kind, params, noise, grid, tg, u0[sl], v0[sl], dW[sl],
                                         record_stride, steps, on_fault)
        except IntegrationFault as exc:
            raise IntegrationFault(f"realization block {sl.start}..{sl.stop - 1}: {exc}",
                                   step=exc.step, time=exc.time, location=exc.location) from exc

    parts = _run_chunked(run, n_members, threads)
    l2_u = np.concatenate([p[1][0] for p in parts], axis=1)
    l2_v = np.concatenate([p[1][1] for p in parts], axis=1)
    snaps = {}
    for j in sorted(steps):
        snaps[j * tg.dt] = (np.concatenate([p[1][2][j][0] for p in parts]),
                            np.concatenate([p[1][2][j][1] for p in parts]))
    faults = {}
    for sl, res in parts:
        faults.update({sl.start + r: f for r, f in res[5].items()})
    return EnsembleTrajectory(
        times=tg.times(record_stride), l2_u=l2_u, l2_v=l2_v, snapshots=snaps,
        final_u=np.concatenate([p[1][3] for p in parts]),
        final_v=np.concatenate([p[1][4] for p in parts]),
        faults=dict(sorted(faults.items())), reference=parts[0][1][6],
    )


INITIAL_KINDS = ("paper-nonlinear", "linear-perturbation", "custom-amplitude")


def initial_condition(kind: str, params: BrusselatorParams, grid: SpatialGrid, seed=0,
                      amplitude: float = 0.1, xi: tuple[float, float] | None = None) -> FieldState:
    """Randomly weighted smooth perturbations of the equilibrium.

    ``u0 = u_inf + amp xi1 (1 + cos 3x)``, ``v0 = v_inf + amp xi2 (1 + sin 3x)``
    with ``xi1, xi2 ~ U(0, 1)`` drawn from ``seed`` (or passed as ``xi``).
    ``paper-nonlinear`` uses amp = 0.1 about the equilibrium;
    ``linear-perturbation`` is the same shape as a deviation (no
    equilibrium); ``custom-amplitude`` is the deviation scaled by
    ``amplitude``.
    """
    if kind not in INITIAL_KINDS:
        raise InvalidArgumentError(f"unknown initial condition {kind!r}; expected one of {INITIAL_KINDS}")
    if xi is None:
        xi = np.random.default_rng(seed).uniform(0.0, 1.0, 2)
    x = grid.nodes
    amp = amplitude if kind == "custom-amplitude" else 0.1
    du = amp * xi[0] * (1.0 + np.cos(3.0 * x))
    dv = amp * xi[1] * (1.0 + np.sin(3.0 * x))
    if kind == "paper-nonlinear":
        ui, vi = equilibrium(params)
        return FieldState(ui + du, vi + dv)
    return FieldState(du, dv)
