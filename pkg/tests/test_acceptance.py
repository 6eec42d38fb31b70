"""Acceptance checks; each test prints one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` to see the verdicts next to the
test results.
"""
import math

import numpy as np
import pytest

from stobruss.analysis import (
    field_lyapunov,
    fit_lyapunov,
    log_norm_series,
    per_mode_lyapunov,
    project_modes,
    reconstruct_field,
    sigma_sweep,
    sign_change_brackets,
)
from stobruss.exceptions import ConsistencyError
from stobruss.model import BrusselatorParams, linearize
from stobruss.sde import (
    FieldState,
    SpatialGrid,
    TimeGrid,
    initial_condition,
    member_seeds,
    simulate_field,
    simulate_field_ensemble,
    simulate_mode,
)
from stobruss.spectral import (
    certified_decay_rate,
    critical_sigma_same,
    deterministic_unstable_band,
    expm2,
    lemma1_certificate,
    mode_matrices,
    neumann_eigenpairs,
    spectral_abscissa,
)
from stobruss.verify import (
    brute_force_abscissa,
    brute_force_band,
    expm_series,
    mode_vs_field_consistency,
    strong_error_em_vs_exact,
)

GRID = SpatialGrid(1.0, 50)
TURING = BrusselatorParams(A=1.0, B=1.8, d_u=5e-5, d_v=2e-3)
STABLE = BrusselatorParams(A=1.0, B=1.8, d_u=2e-3, d_v=1e-3)
NL_STABLE = BrusselatorParams(A=1.0, B=1.95, d_u=1e-3, d_v=2e-3)
SEED = 0
REALIZATIONS = 100
K_SCAN = 200


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        return ok

    return emit


def _single(kind, params, noise, tg, init_kind, seed=SEED, **kw):
    noise_seed, init_seed = member_seeds(seed, 0)
    init = initial_condition(init_kind, params, GRID, seed=init_seed)
    return simulate_field(kind, params, noise, GRID, tg, init, seed=noise_seed, **kw)


def test_criterion_1_turing_instability(report):
    modes = neumann_eigenpairs(1.0, K_SCAN)
    band = deterministic_unstable_band(TURING, modes)
    a = bool(band) and band == brute_force_band(TURING, K_SCAN)

    lin = _single("linear", TURING, (0.0, 0.0), TimeGrid(50, 0.005), "linear-perturbation")
    slope = fit_lyapunov(*log_norm_series(lin), window=(20, 50)).slope
    b = slope > 0

    nl = _single("nonlinear", TURING, (0.0, 0.0), TimeGrid(50, 0.005), "paper-nonlinear")
    n, t = nl.l2_norms, nl.times
    tail = n[t >= 40]
    grows = n.max() > 5 * n[0]
    saturates = np.ptp(tail) < 0.1 * tail.mean()
    spread = float(np.ptp(nl.final.u))
    c = grows and saturates and spread > 0.1

    ok = report(1, a and b and c,
                f"band k={min(band)}..{max(band)} matches scan={a}; linear slope[20,50]={slope:.4f}; "
                f"nonlinear norm {n[0]:.3f}->{n[-1]:.3f}, tail range {np.ptp(tail):.4f}, max-min(u)={spread:.3f}")
    assert ok


def test_criterion_2_stable_sets(report):
    modes = neumann_eigenpairs(1.0, K_SCAN)
    bands = [deterministic_unstable_band(p, modes) for p in (STABLE, NL_STABLE)]
    empty = not any(bands) and not any(brute_force_band(p, K_SCAN) for p in (STABLE, NL_STABLE))

    lin = _single("linear", STABLE, (0.0, 0.0), TimeGrid(50, 0.005), "linear-perturbation")
    slope = fit_lyapunov(*log_norm_series(lin)).slope

    # slowest mode decays at rate 0.025; T=60 would leave a deviation near 0.025
    nl = _single("nonlinear", NL_STABLE, (0.0, 0.0), TimeGrid(300, 0.005), "paper-nonlinear",
                 record_stride=100)
    dev = float(nl.l2_norms[-1])

    ok = report(2, empty and slope < 0 and dev < 1e-3,
                f"bands empty={empty}; linear slope={slope:.4f}; nonlinear final deviation at T=300 {dev:.2e} (< 1e-3)")
    assert ok


def test_criterion_3_certificate(report):
    rng = np.random.default_rng(SEED)
    modes = neumann_eigenpairs(1.0, K_SCAN)
    worst = -math.inf
    checked = 0
    for _ in range(200):
        A = rng.uniform(0.3, 3.0)
        B = rng.uniform(1.0, 1.0 + A * A)
        if not 1.0 < B < 1.0 + A * A:
            continue
        p = BrusselatorParams(A, B, rng.uniform(1e-5, 1e-2), rng.uniform(1e-5, 1e-2))
        sigma = math.sqrt(2.0 * (B - 1.0)) * rng.uniform(1.0001, 2.5)
        omega = certified_decay_rate(p, sigma)
        lam = float(spectral_abscissa(p, sigma, modes).max())
        worst = max(worst, lam + omega)
        try:
            lemma1_certificate(p, sigma, K_SCAN)
        except ConsistencyError:
            worst = math.inf
        checked += 1
    ok = report(3, checked == 200 and worst <= 1e-12,
                f"{checked} sets, max(max Re lambda + omega) = {worst:.3e} (<= 1e-12)")
    assert ok


def test_criterion_4_spectral_shift(report):
    crit = critical_sigma_same(TURING, K_SCAN)
    modes = neumann_eigenpairs(1.0, K_SCAN)
    above, below = 1.05 * crit.sigma_crit, 0.95 * crit.sigma_crit
    hi = spectral_abscissa(TURING, above, modes)
    lo = spectral_abscissa(TURING, below, modes)
    bf_hi = brute_force_abscissa(TURING, above, above, K_SCAN)
    bf_lo = brute_force_abscissa(TURING, below, below, K_SCAN)
    agree = np.max(np.abs(hi - bf_hi)) <= 1e-10 and np.max(np.abs(lo - bf_lo)) <= 1e-10
    n_unstable = int(np.sum(lo > 0))
    ok = report(4, bool(np.all(hi < 0)) and n_unstable >= 1 and agree,
                f"sigma_crit={crit.sigma_crit:.5f} (k={crit.k_max}); max at 1.05x {hi.max():.4f}; "
                f"unstable modes at 0.95x {n_unstable}; brute-force agreement={agree}")
    assert ok


@pytest.mark.slow
def test_criterion_5_equal_noise_suppression(report):
    sigmas = [round(0.2 * i, 1) for i in range(11)]
    rows = sigma_sweep(TURING, "same", sigmas, TimeGrid(50, 0.005), n_realizations=REALIZATIONS,
                       base_seed=SEED)
    means = np.array([r.mean_lyapunov for r in rows])
    ci = np.array([r.ci95_halfwidth for r in rows])
    a = bool(np.all(means[1:] <= means[:-1] + ci[1:] + ci[:-1]))
    certified = [r for r in rows if r.theoretical_bound is not None]
    b = bool(certified) and all(r.mean_lyapunov <= r.theoretical_bound + 2 * r.ci95_halfwidth for r in certified)
    brackets = sign_change_brackets(rows)
    c = len(brackets) == 1 and 0.5 <= brackets[0][0] and brackets[0][1] <= 1.0
    far = field_lyapunov(TURING, (2.0, 2.0), GRID, TimeGrid(50, 0.005), REALIZATIONS, SEED,
                         init_kind="custom-amplitude", amplitude=10.0)
    d = far.mean < -0.5
    ok = report(5, a and b and c and d,
                f"monotone={a}; bound holds at sigma>={certified[0].sigma if certified else None}={b}; "
                f"sign change {brackets}; far-data slope at sigma=2 {far.mean:.3f} (omega=1.2)")
    assert ok


@pytest.mark.slow
def test_criterion_6_one_sided_destabilization(report):
    values = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0]
    rows = sigma_sweep(STABLE, "sigma_v", values, TimeGrid(60, 0.005), n_realizations=REALIZATIONS,
                       base_seed=SEED)
    by = {r.sigma: r for r in rows}
    neg = by[0.0].mean_lyapunov < 0 and by[0.5].mean_lyapunov < 0
    top = by[5.0]
    pos = top.mean_lyapunov - top.ci95_halfwidth > 0
    brackets = sign_change_brackets(rows)
    band = len(brackets) == 1 and 1.0 <= brackets[0][0] and brackets[0][1] <= 2.5

    exps = per_mode_lyapunov(STABLE, (0.0, 5.0), neumann_eigenpairs(1.0, 50), TimeGrid(60, 0.005),
                             n_realizations=REALIZATIONS, base_seed=SEED)
    m = np.array([e.lyapunov.mean for e in exps])
    cutoff = int(np.argmax(m <= 0)) if np.any(m <= 0) else len(m)
    modes_ok = m[0] > 0 and bool(np.all(m[29:] < 0)) and 8 <= cutoff <= 25
    ok = report(6, neg and pos and band and modes_ok,
                f"means sigma_v=0/0.5: {by[0.0].mean_lyapunov:.3f}/{by[0.5].mean_lyapunov:.3f}; "
                f"sigma_v=5: {top.mean_lyapunov:.3f}+-{top.ci95_halfwidth:.3f}; sign change {brackets}; "
                f"per-mode k=1 {m[0]:.3f}, max over k>=30 {m[29:].max():.3f}, "
                f"last positive mode k={cutoff} (need 8..25)")
    assert ok


@pytest.mark.slow
def test_criterion_7_nonlinear_noise(report):
    n_seeds = 20
    sup = simulate_field_ensemble("nonlinear", TURING, (1.25, 1.25), GRID, TimeGrid(50, 0.005),
                                  n_seeds, SEED, record_stride=100, on_fault="mask")
    sup_ok = sup.ok & (sup.l2_norms[-1] < 1e-2)

    small = simulate_field_ensemble("nonlinear", NL_STABLE, (0.0, 0.2), GRID, TimeGrid(60, 0.005),
                                    n_seeds, SEED, record_stride=100, on_fault="mask")
    small_ok = small.ok & (small.l2_norms[-1] < 0.1)

    # dt=0.001: at 0.005 some paths overflow before t=60
    snaps = (40.0, 50.0, 60.0)
    big = simulate_field_ensemble("nonlinear", NL_STABLE, (0.0, 3.0), GRID, TimeGrid(60, 0.001),
                                  n_seeds, SEED, record_stride=10, snapshot_times=snaps, on_fault="mask")
    window = big.times >= 40
    with np.errstate(invalid="ignore"):
        peak = np.where(big.ok, np.max(np.nan_to_num(big.l2_norms[window], nan=0.0), axis=0), 0.0)
    spread = np.array([max(np.ptp(big.snapshots[s][0][r]) for s in snaps) for r in range(n_seeds)])
    big_ok = big.ok & (peak > 0.5) & (spread > 0.1)

    fr = [float(np.mean(x)) for x in (sup_ok, small_ok, big_ok)]
    ok = report(7, min(fr) >= 0.9,
                f"suppression sigma=1.25 {fr[0]:.0%}; small noise sigma_v=0.2 {fr[1]:.0%}; "
                f"big noise sigma_v=3 {fr[2]:.0%} (peak>0.5 {np.mean(peak > 0.5):.0%}, "
                f"max-min(u)>0.1 {np.mean(spread > 0.1):.0%}, faults {len(big.faults)}); need >= 90% each")
    assert ok


def test_criterion_8_numerics(report):
    parts = {}
    slopes = [strong_error_em_vs_exact(TURING, s, 1, [1e-2, 5e-3, 2.5e-3, 1.25e-3], n_paths=200,
                                       base_seed=SEED).slope for s in (1.0, 2.0)]
    parts["strong order"] = (all(0.35 <= s <= 0.65 for s in slopes), "slopes " + "/".join(f"{s:.3f}" for s in slopes))

    rng = np.random.default_rng(SEED)
    worst = 0.0
    for M in rng.uniform(-10, 10, (10_000, 2, 2)):
        ref = expm_series(M)
        worst = max(worst, np.linalg.norm(expm2(M) - ref, 2) / np.linalg.norm(ref, 2))
    parts["expm2"] = (worst <= 1e-10, f"{worst:.1e}")

    modes = neumann_eigenpairs(1.0, 50)
    state = FieldState(rng.normal(size=50), rng.normal(size=50))
    g, h = project_modes(state, modes, GRID)
    energy = GRID.dx * (np.sum(state.u**2) + np.sum(state.v**2))
    back = reconstruct_field(g, h, modes, GRID)
    pars = max(abs(np.sum(g**2 + h**2) - energy) / energy,
               np.linalg.norm(back.u - state.u) / np.linalg.norm(state.u),
               np.linalg.norm(back.v - state.v) / np.linalg.norm(state.v))
    parts["Parseval"] = (pars <= 1e-8, f"{pars:.1e}")

    tg = TimeGrid(1.0, 1e-4)
    exact = max(mode_vs_field_consistency(TURING, k, tg, GRID, reference="exact").max_rel_deviation
                for k in (1, 4, 10))
    scheme = max(mode_vs_field_consistency(TURING, k, tg, GRID).max_rel_deviation for k in (1, 4, 10))
    parts["mode-vs-field"] = (exact <= 1e-6, f"{exact:.1e} vs expm2 flow, {scheme:.1e} vs same Euler step")

    mm = mode_matrices(linearize(TURING), TURING.d_u, TURING.d_v, 0.0, 1.5, neumann_eigenpairs(1.0, 20)[-1])
    runs = [simulate_mode(mm, [1.0, 1.0], TimeGrid(60, 0.005), seed=SEED, renorm_threshold=r).log_norms
            for r in (1e3, 1e6, 1e9)]
    renorm = max(np.max(np.abs(r - runs[0])) for r in runs[1:])
    parts["renormalization"] = (renorm <= 1e-9, f"{renorm:.1e}")

    a = simulate_field_ensemble("linear", TURING, (0.5, 1.0), GRID, TimeGrid(5, 0.005), 6, SEED, threads=1)
    b = simulate_field_ensemble("linear", TURING, (0.5, 1.0), GRID, TimeGrid(5, 0.005), 6, SEED, threads=3)
    same = a.l2_u.tobytes() == b.l2_u.tobytes() and a.final_v.tobytes() == b.final_v.tobytes()
    parts["determinism"] = (same, "bitwise" if same else "differs")

    ok = report(8, all(v[0] for v in parts.values()),
                "; ".join(f"{k} {'ok' if v[0] else 'FAILED'} ({v[1]})" for k, v in parts.items()))
    assert ok
