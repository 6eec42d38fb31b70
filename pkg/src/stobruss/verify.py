"""Independent oracles: brute-force routes that check the production paths.

Nothing here calls the closed forms it is meant to check. The series
exponential never touches :func:`~stobruss.spectral.expm2`, and the
spectral scans use ``numpy.linalg`` instead of the quadratic formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .model import BrusselatorParams, equilibrium, linearize, reaction_terms
from .sde import (
    FieldState,
    SpatialGrid,
    TimeGrid,
    diffusion_number,
    em_mode_terminal,
    sample_noise_path,
    simulate_field,
)
from .spectral import (
    EigenMode,
    discrete_mu,
    drift_matrix,
    exact_mode_solution,
    expm2,
    mode_matrices,
    neumann_eigenpairs,
)


# ---------------------------------------------------------------------------
# Matrix exponential


def _mul(P, Q):
    (a, b), (c, d) = P
    (e, f), (g, h) = Q
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def _norm1(P):
    (a, b), (c, d) = P
    return max(abs(a) + abs(c), abs(b) + abs(d))


def expm_series(M, tol: float = 1e-17) -> np.ndarray:
    """Scaling-and-squaring Taylor exponential of a 2x2 matrix.

    The scaled matrix has 1-norm at most 1/2; terms are added until the next
    one is below ``tol`` times the running sum, then the result is squared
    back up.
    """
    arr = np.asarray(M, dtype=float)
    if arr.shape != (2, 2) or not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("expected a finite 2x2 matrix")
    P = ((float(arr[0, 0]), float(arr[0, 1])), (float(arr[1, 0]), float(arr[1, 1])))
    nrm = _norm1(P)
    squarings = max(0, math.ceil(math.log2(nrm)) + 1) if nrm > 0 else 0
    scale = 2.0 ** -squarings
    X = tuple(tuple(x * scale for x in row) for row in P)
    total = ((1.0, 0.0), (0.0, 1.0))
    term = total
    for n in range(1, 60):
        term = _mul(term, X)
        term = tuple(tuple(x / n for x in row) for row in term)
        total = tuple(tuple(s + t for s, t in zip(rs, rt)) for rs, rt in zip(total, term))
        if _norm1(term) < tol * _norm1(total):
            break
    for _ in range(squarings):
        total = _mul(total, total)
    return np.array(total)


# ---------------------------------------------------------------------------
# Brute-force spectral scans


def brute_force_abscissa(params: BrusselatorParams, sigma_u: float, sigma_v: float, K: int,
                         L: float = 1.0) -> np.ndarray:
    """``max Re eig(E_k)`` for k = 1..K via ``numpy.linalg.eigvals``."""
    co = linearize(params)
    out = np.empty(K)
    noise = np.diag([sigma_u**2, sigma_v**2]) / 2.0
    for i in range(K):
        mu = (i * math.pi / L) ** 2
        out[i] = np.linalg.eigvals(drift_matrix(co, params.d_u, params.d_v, mu) - noise).real.max()
    return out


def brute_force_band(params: BrusselatorParams, K: int, L: float = 1.0) -> frozenset[int]:
    """Modes with ``det(A_k) < 0`` by direct determinant evaluation."""
    co = linearize(params)
    band = set()
    for k in range(1, K + 1):
        mu = ((k - 1) * math.pi / L) ** 2
        if np.linalg.det(drift_matrix(co, params.d_u, params.d_v, mu)) < 0:
            band.add(k)
    return frozenset(band)


# ---------------------------------------------------------------------------
# Strong convergence


@dataclass(frozen=True)
class ConvergenceStudy:
    dts: np.ndarray
    errors: np.ndarray
    slope: float


def strong_error_em_vs_exact(params: BrusselatorParams, sigma_same: float, mode_k: int, dts,
                             n_paths: int = 200, base_seed: int = 0, T: float = 1.0,
                             V0=(1.0, 1.0), L: float = 1.0) -> ConvergenceStudy:
    """Mean terminal error of Euler-Maruyama against the closed-form solution.

    Every step size sees the same Brownian paths: coarse increments are block
    sums of the finest path, and the exact solution uses the path's ``W_T``.
    """
    dts = np.asarray(sorted(dts, reverse=True), dtype=float)
    if np.any(np.diff(dts) >= 0):
        raise InvalidArgumentError("dts must be distinct")
    fine = TimeGrid(T, float(dts[-1]))
    factors = [int(round(dt / fine.dt)) for dt in dts]
    if any(abs(f * fine.dt - dt) > 1e-12 * dt for f, dt in zip(factors, dts)):
        raise InvalidArgumentError("every dt must be an integer multiple of the finest dt")
    mode = neumann_eigenpairs(L, mode_k)[-1]
    mm = mode_matrices(linearize(params), params.d_u, params.d_v, sigma_same, sigma_same, mode)
    paths = [sample_noise_path(fine, (int(base_seed), p, 0)) for p in range(n_paths)]
    exact = np.stack([exact_mode_solution(mm, V0, T, float(np.sum(p.increments))) for p in paths])
    errors = []
    for f, dt in zip(factors, dts):
        dW = np.stack([p.coarsen(f).increments for p in paths])
        em = em_mode_terminal(mm, V0, dW, float(dt))
        errors.append(float(np.mean(np.linalg.norm(em - exact, axis=1))))
    errors = np.array(errors)
    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    return ConvergenceStudy(dts, errors, slope)


# ---------------------------------------------------------------------------
# Mode reduction of the discretised field


@dataclass(frozen=True)
class ModeFieldConsistency:
    max_rel_deviation: float
    max_leakage: float
    reference: str


def mode_vs_field_consistency(params: BrusselatorParams, mode_k: int, tg: TimeGrid,
                              grid: SpatialGrid, reference: str = "euler",
                              stride: int = 100) -> ModeFieldConsistency:
    """Evolve the noiseless linear field from ``(phi_k, 0)`` and project.

    The projected pair ``(g_k, h_k)`` is compared with the 2x2 flow of the
    discrete-eigenvalue drift ``A_k^h``: ``reference="euler"`` propagates it
    with the same explicit step (isolating the spatial reduction),
    ``"exact"`` uses ``expm2(A_k^h t)`` (adds the time-stepping error).
    Leakage is the largest coefficient on any other mode.
    """
    if reference not in ("euler", "exact"):
        raise InvalidArgumentError(f"reference must be 'euler' or 'exact', got {reference!r}")
    if mode_k > grid.N:
        raise InvalidArgumentError(f"mode {mode_k} is not resolvable on {grid.N} cells")
    co = linearize(params)
    mu_h = float(discrete_mu(mode_k, grid.N, grid.dx))
    A_h = drift_matrix(co, params.d_u, params.d_v, mu_h)
    mode = EigenMode(mode_k, mu_h, grid.L, discrete=True)
    x = grid.nodes
    init = FieldState(mode.phi(x), np.zeros(grid.N))
    traj = simulate_field("linear", params, (0.0, 0.0), grid, tg, init, seed=0,
                          record_stride=tg.n_steps, snapshot_every=stride)
    basis = np.stack([EigenMode(k, 0.0, grid.L).phi(x) for k in range(1, grid.N + 1)])
    step = np.eye(2) + A_h * tg.dt
    V = np.array([1.0, 0.0])
    j_prev = 0
    worst = leak = 0.0
    for snap in traj.snapshots:
        j = int(round(snap.t / tg.dt))
        if reference == "euler":
            for _ in range(j - j_prev):
                V = step @ V
            j_prev = j
            ref = V
        else:
            ref = expm2(A_h * snap.t) @ np.array([1.0, 0.0])
        g = grid.dx * (basis @ snap.u)
        h = grid.dx * (basis @ snap.v)
        got = np.array([g[mode_k - 1], h[mode_k - 1]])
        worst = max(worst, float(np.linalg.norm(got - ref) / np.linalg.norm(ref)))
        others = np.delete(np.concatenate([g[:, None], h[:, None]], axis=1), mode_k - 1, axis=0)
        if others.size:
            leak = max(leak, float(np.abs(others).max()))
    return ModeFieldConsistency(worst, leak, reference)


def discrete_vs_continuous_mu(grid: SpatialGrid, K: int, resolved_gap: float = 0.1):
    """Rows ``(k, mu, mu_h, relative_gap, resolved)`` for k = 1..K."""
    if K > grid.N:
        raise InvalidArgumentError(f"K={K} exceeds the {grid.N} resolvable modes")
    rows = []
    for k in range(1, K + 1):
        mu = ((k - 1) * math.pi / grid.L) ** 2
        mu_h = float(discrete_mu(k, grid.N, grid.dx))
        gap = 0.0 if mu == 0 else abs(mu - mu_h) / mu
        rows.append((k, mu, mu_h, gap, gap < resolved_gap))
    return rows


# ---------------------------------------------------------------------------
# Report of derived example values


def derived_values() -> list[tuple[str, float]]:
    """Numbers quoted as derived examples, recomputed by the shipped code."""
    from .spectral import (
        characteristic_coeffs,
        critical_sigma_same,
        deterministic_unstable_band,
        lemma1_certificate,
    )

    turing = BrusselatorParams(1.0, 1.8, 5e-5, 2e-3)
    stable = BrusselatorParams(1.0, 1.8, 2e-3, 1e-3)
    co = linearize(turing)
    out: list[tuple[str, float]] = []
    u, v = equilibrium(BrusselatorParams(2.0, 3.0))
    out += [("equilibrium_u(A=2,B=3)", u), ("equilibrium_v(A=2,B=3)", v)]
    f, g = reaction_terms(turing, 0.0, 0.0)
    out += [("reaction_f(u=v=0)", f), ("reaction_g(u=v=0)", g)]
    out += [("trace_T(B=1.8)", co.trace_T), ("det_D(B=1.8)", co.det_D)]
    co95 = linearize(BrusselatorParams(1.0, 1.95, 1e-3, 2e-3))
    out += [("trace_T(B=1.95)", co95.trace_T)]
    _, z = characteristic_coeffs(co, turing.d_u, turing.d_v, 1000.0, 0.0)
    out += [("z(mu=1000,sigma=0)", float(z))]
    w, _ = characteristic_coeffs(co, turing.d_u, turing.d_v, 0.0, 2.0)
    out += [("w(mu=0,sigma=2)", float(w))]
    p = turing.d_u * turing.d_v
    q = co.a * turing.d_v + co.d * turing.d_u
    disc = math.sqrt(q * q - 4 * p * co.det_D)
    out += [("band_mu_low", (q - disc) / (2 * p)), ("band_mu_high", (q + disc) / (2 * p))]
    band = sorted(deterministic_unstable_band(turing, neumann_eigenpairs(1.0, 200)))
    out += [("band_k_first", band[0]), ("band_k_last", band[-1]), ("band_size", len(band))]
    out += [("band_size_stable_set", len(deterministic_unstable_band(stable, neumann_eigenpairs(1.0, 200))))]
    crit = critical_sigma_same(turing, 300)
    out += [("lambda_star", crit.lambda_star), ("lambda_star_k", crit.k_max),
            ("lambda_star_mu", ((crit.k_max - 1) * math.pi) ** 2), ("sigma_crit", crit.sigma_crit)]
    out += [("omega(B=1.8,sigma=2)", lemma1_certificate(turing, 2.0).omega)]
    out += [("sigma0_squared(B=1.8)", 2 * (turing.B - 1))]
    out += [("cfl_ratio_default_grid", diffusion_number(turing, SpatialGrid(1.0, 50), TimeGrid(50.0, 0.005)))]
    study = strong_error_em_vs_exact(turing, 1.0, 1, [1e-2, 5e-3, 2.5e-3, 1.25e-3], 200, 0)
    out += [("em_strong_order_slope(sigma=1)", study.slope)]
    return out
