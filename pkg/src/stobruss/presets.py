"""Experiment presets: each maps a configuration to a set of result tables."""
from __future__ import annotations

from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import analysis
from .config import ExperimentConfig, build_config, extract_preamble, parse_lines, parse_overrides
from .exceptions import ConfigError, ModeTruncationError
from .sde import FieldState, SpatialGrid, initial_condition, member_seeds, simulate_field
from .spectral import critical_sigma_same, deterministic_unstable_band, dispersion, neumann_eigenpairs
from .tables import ResultTable, build_id, write_csv

NORM_COLUMNS = ("t", "l2_u", "l2_v", "log_norm_sum")
SWEEP_COLUMNS = ("sigma", "lyap_mean", "lyap_ci95", "bound_negomega", "n_real")
MODE_COLUMNS = ("k", "mu", "lambda_re_max_det", "lyap_mean", "lyap_ci95")
PROFILE_COLUMNS = ("x", "u", "v")

TURING_SET = {"A": "1", "B": "1.8", "d_u": "5e-5", "d_v": "2e-3"}
DESTAB_SET = {"A": "1", "B": "1.8", "d_u": "2e-3", "d_v": "1e-3"}
NONLINEAR_SET = {"A": "1", "B": "1.95", "d_u": "0.001", "d_v": "0.002"}


# ---------------------------------------------------------------------------
# Table builders


def norms_table(times, l2_u, l2_v) -> ResultTable:
    with np.errstate(divide="ignore"):
        log_sum = np.log(np.asarray(l2_u) + np.asarray(l2_v))
    rows = [[float(t), float(a), float(b), float(c)] for t, a, b, c in zip(times, l2_u, l2_v, log_sum)]
    return ResultTable("norms", NORM_COLUMNS, rows)


def profile_table(grid: SpatialGrid, state: FieldState, name: str = "profile") -> ResultTable:
    rows = [[float(x), float(u), float(v)] for x, u, v in zip(grid.nodes, state.u, state.v)]
    return ResultTable(name, PROFILE_COLUMNS, rows)


def sweep_table(rows: Sequence[analysis.SweepRow]) -> ResultTable:
    return ResultTable("sweep", SWEEP_COLUMNS, [
        [r.sigma, r.mean_lyapunov, r.ci95_halfwidth, r.theoretical_bound, r.n_realizations] for r in rows
    ])


def modes_table(exps: Sequence[analysis.ModeExponent]) -> ResultTable:
    return ResultTable("modes", MODE_COLUMNS, [
        [e.k, e.mu, e.lambda_re_max_det, e.lyapunov.mean, e.lyapunov.ci95_halfwidth] for e in exps
    ])


# ---------------------------------------------------------------------------
# Runners


def _single_run(cfg: ExperimentConfig):
    """Member 0 of the ensemble keyed by ``cfg.seed``."""
    noise_seed, init_seed = member_seeds(cfg.seed, 0)
    init = initial_condition(cfg.init_kind, cfg.params, cfg.grid, init_seed, cfg.amplitude)
    return simulate_field(cfg.kind, cfg.params, cfg.noise, cfg.grid, cfg.time, init, seed=noise_seed,
                          record_stride=cfg.record_stride, snapshot_times=cfg.snapshot_times)


def _field_tables(cfg: ExperimentConfig) -> list[ResultTable]:
    traj = _single_run(cfg)
    tables = [norms_table(traj.times, traj.l2_u, traj.l2_v), profile_table(cfg.grid, traj.final)]
    for snap in traj.snapshots:
        tables.append(profile_table(cfg.grid, snap, f"profile_t{snap.t:g}"))
    return tables


def _mode_exponents(cfg: ExperimentConfig):
    return analysis.per_mode_lyapunov(cfg.params, cfg.noise, neumann_eigenpairs(cfg.grid.L, cfg.K),
                                      cfg.time, cfg.n_realizations, cfg.seed, cfg.fit_window)


def _sweep(cfg: ExperimentConfig, axis: str) -> ResultTable:
    if not cfg.sweep:
        raise ConfigError("sweep presets need at least one value in 'sweep'")
    rows = analysis.sigma_sweep(cfg.params, axis, cfg.sweep, cfg.time, cfg.n_realizations, cfg.seed,
                                use_field=True, grid=cfg.grid, window=cfg.fit_window)
    table = sweep_table(rows)
    table.metadata["sweep_axis"] = axis
    brackets = analysis.sign_change_brackets(rows)
    table.metadata["sign_change"] = "; ".join(f"[{a:g}, {b:g}]" for a, b in brackets) or "none"
    if axis == "same":
        try:
            crit = critical_sigma_same(cfg.params, cfg.K, cfg.grid.L)
            table.metadata["sigma_crit"] = crit.sigma_crit
        except ModeTruncationError:
            table.metadata["sigma_crit"] = "unresolved"
    return table


def run_field(cfg):
    return _field_tables(cfg)


def run_field_and_modes(cfg):
    return _field_tables(cfg) + [modes_table(_mode_exponents(cfg))]


def run_same_sweep(cfg):
    return [_sweep(cfg, "same")]


def run_sigma_v_sweep(cfg):
    return [_sweep(cfg, "sigma_v")]


def run_dispersion(cfg):
    modes = neumann_eigenpairs(cfg.grid.L, cfg.K)
    pts = dispersion(cfg.params, cfg.noise, modes)
    band = deterministic_unstable_band(cfg.params, modes)
    cols = ("k", "mu", "w", "z", "discriminant", "lambda_re_max", "in_band")
    table = ResultTable("dispersion", cols, [
        [p.k, p.mu, float(p.w), float(p.z), float(p.discriminant), p.lambda_re_max, p.k in band]
        for p in pts
    ])
    table.metadata["band"] = f"{min(band)}..{max(band)}" if band else "empty"
    return [table]


def run_derived(cfg):
    from .verify import derived_values

    return [ResultTable("derived", ("name", "value"), [[n, float(v)] for n, v in derived_values()])]


# name: (description, preset layer, runner)
PRESETS: dict[str, tuple[str, dict, Callable]] = {
    "lin-turing": ("linearised field, deterministic Turing instability and per-mode exponents",
                   {**TURING_SET, "kind": "linear", "sigma": "0", "T": "50", "K": "50"},
                   run_field_and_modes),
    "lin-suppress-sweep": ("equal-intensity sweep of the linearised field with the -omega bound",
                           {**TURING_SET, "kind": "linear", "T": "50",
                            "sweep": "0,0.2,0.4,0.6,0.8,1.0,1.2,1.4,1.6,1.8,2.0"}, run_same_sweep),
    "lin-global": ("linearised field at sigma_u = sigma_v = 2 from large initial data",
                   {**TURING_SET, "kind": "linear", "sigma": "2", "T": "50",
                    "init": "custom-amplitude", "amplitude": "10"}, run_field),
    "lin-destab-sweep": ("sigma_v sweep (sigma_u = 0) on the deterministically stable set",
                         {**DESTAB_SET, "kind": "linear", "T": "60", "sigma_u": "0",
                          "sweep": "0,0.5,1,1.5,2,3,5"}, run_sigma_v_sweep),
    "lin-destab-modes": ("per-mode exponents at sigma_v = 5, sigma_u = 0 on the stable set",
                         {**DESTAB_SET, "kind": "linear", "T": "60", "sigma_u": "0", "sigma_v": "5"},
                         run_field_and_modes),
    "nl-turing": ("nonlinear field without noise: Turing pattern",
                  {**TURING_SET, "kind": "nonlinear", "sigma": "0", "T": "50"}, run_field),
    "nl-suppress": ("nonlinear field with sigma_u = sigma_v = 1.25: pattern suppressed",
                    {**TURING_SET, "kind": "nonlinear", "sigma": "1.25", "T": "50"}, run_field),
    "nl-small-noise": ("nonlinear stable set with sigma_v = 0.2",
                       {**NONLINEAR_SET, "kind": "nonlinear", "T": "60", "sigma_u": "0", "sigma_v": "0.2",
                        "snapshot_times": "20"}, run_field),
    "nl-big-noise": ("nonlinear stable set with sigma_v = 3",
                     {**NONLINEAR_SET, "kind": "nonlinear", "T": "60", "sigma_u": "0", "sigma_v": "3.0",
                      "snapshot_times": "20", "dt": "0.001"}, run_field),
    "dispersion": ("growth rates, characteristic coefficients and unstable band per mode",
                   {**TURING_SET, "sigma": "0", "K": "50"}, run_dispersion),
    "derived-values": ("derived reference numbers recomputed by the shipped oracles", {}, run_derived),
}
GENERIC = "run"


def _resolve(name: str, text: str, overrides) -> tuple[str, ExperimentConfig]:
    """Pick the preset (``run`` may name one in its config) and build the config."""
    file_keys = parse_lines(extract_preamble(text) or text)
    declared = {k: v for k, (v, _) in {**file_keys, **overrides}.items() if k == "preset" and v}
    if name == GENERIC:
        name = declared.get("preset", GENERIC)
    elif "preset" in declared and declared["preset"] != name:
        raise ConfigError(f"config names preset {declared['preset']!r} but {name!r} was requested")
    if name != GENERIC and name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)} or {GENERIC}")
    layer = {} if name == GENERIC else dict(PRESETS[name][1])
    if name != GENERIC:
        layer["preset"] = name
    return name, build_config(layer, text, overrides)


def _as_overrides(overrides) -> dict:
    if overrides is None:
        return {}
    if isinstance(overrides, Mapping):
        return parse_overrides([f"{k}={v}" for k, v in overrides.items()])
    return parse_overrides(list(overrides))


def run_preset(name: str, overrides=None, out_dir=None, config_text: str = "") -> dict[str, Path]:
    """Run a preset and write its tables; returns ``{table name: path}``.

    ``overrides`` is a mapping or a list of ``key=value`` strings and wins
    over ``config_text``, which wins over the preset layer.
    """
    name, cfg = _resolve(name, config_text, _as_overrides(overrides))
    runner = run_field if name == GENERIC else PRESETS[name][2]
    tables = runner(cfg)
    out = Path(out_dir) if out_dir is not None else Path(cfg.out)
    written = {}
    for table in tables:
        meta = {"build": build_id(), "preset": name, "table": table.name, "seed": cfg.seed,
                "config_hash": cfg.digest}
        meta.update(table.metadata)
        table.metadata = meta
        table.config_text = cfg.as_text()
        written[table.name] = write_csv(table, out / f"{name}_{table.name}.csv")
    return written
