"""Flat ``key = value`` experiment configuration."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping

from .exceptions import ConfigError, StobrussError
from .model import BrusselatorParams
from .sde import INITIAL_KINDS, SpatialGrid, TimeGrid, check_cfl


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(p) for p in text.split(","))


def _kind(text: str) -> str:
    if text not in ("linear", "nonlinear"):
        raise ValueError("expected 'linear' or 'nonlinear'")
    return text


def _init(text: str) -> str:
    if text and text not in INITIAL_KINDS:
        raise ValueError(f"expected one of {', '.join(INITIAL_KINDS)}")
    return text


def _opt_float(text: str):
    return None if text.strip() in ("", "none", "None") else float(text)


# key: (parser, default text, unit, description)
KEYS: dict[str, tuple] = {
    "preset": (str, "", "-", "experiment preset recorded for re-runs"),
    "A": (float, "1.0", "-", "feed concentration A"),
    "B": (float, "1.8", "-", "feed concentration B"),
    "d_u": (float, "5e-05", "length^2/time", "diffusivity of u"),
    "d_v": (float, "0.002", "length^2/time", "diffusivity of v"),
    "sigma_u": (float, "0.0", "1/sqrt(time)", "noise intensity on u"),
    "sigma_v": (float, "0.0", "1/sqrt(time)", "noise intensity on v"),
    "L": (float, "1.0", "length", "domain length"),
    "dx": (float, "0.02", "length", "cell width; N = L/dx"),
    "dt": (float, "0.005", "time", "time step"),
    "T": (float, "50.0", "time", "time horizon"),
    "seed": (int, "0", "-", "base RNG seed"),
    "n_realizations": (int, "100", "-", "ensemble size"),
    "K": (int, "35", "-", "number of eigenmodes in mode tables"),
    "record_stride": (int, "1", "steps", "norm recording stride"),
    "sweep": (_floats, "", "1/sqrt(time)", "comma-separated noise intensities to sweep"),
    "kind": (_kind, "nonlinear", "-", "field equations: linear | nonlinear"),
    "init": (_init, "", "-", "initial data: paper-nonlinear | linear-perturbation | custom-amplitude"),
    "amplitude": (float, "0.1", "concentration", "perturbation amplitude for custom-amplitude"),
    "fit_start": (_opt_float, "", "time", "Lyapunov fit window start (default 0.3 T)"),
    "fit_end": (_opt_float, "", "time", "Lyapunov fit window end (default T)"),
    "snapshot_times": (_floats, "", "time", "comma-separated instants for extra profile tables"),
    "out": (str, "results", "-", "output directory"),
}

# convenience alias expanded in place to sigma_u and sigma_v
ALIASES = {"sigma": ("sigma_u", "sigma_v")}


def help_text() -> str:
    lines = ["configuration keys (key = value; defaults shown, presets override them):"]
    width = max(len(k) for k in KEYS)
    for key, (_, default, unit, desc) in KEYS.items():
        shown = default if default != "" else "(unset)"
        lines.append(f"  {key:<{width}}  default {shown:<10} unit {unit:<14} {desc}")
    lines.append(f"  {'sigma':<{width}}  alias                                      sets sigma_u and sigma_v together")
    return "\n".join(lines)


@dataclass(frozen=True)
class Source:
    origin: str  # "preset" | "file" | "set" | "default"
    line: int | None = None

    def where(self) -> str:
        if self.origin == "file":
            return f"line {self.line}"
        if self.origin == "set":
            return f"--set #{self.line}"
        return self.origin


@dataclass(frozen=True)
class ExperimentConfig:
    params: BrusselatorParams
    noise: tuple[float, float]
    grid: SpatialGrid
    time: TimeGrid
    seed: int
    preset: str
    sweep: tuple[float, ...]
    out: str
    record_stride: int
    n_realizations: int
    K: int
    kind: str
    init: str
    amplitude: float
    fit_start: float | None
    fit_end: float | None
    snapshot_times: tuple[float, ...]
    raw: tuple[tuple[str, str], ...]

    @property
    def fit_window(self) -> tuple[float, float]:
        t0 = 0.3 * self.time.T if self.fit_start is None else self.fit_start
        t1 = self.time.T if self.fit_end is None else self.fit_end
        return t0, t1

    @property
    def init_kind(self) -> str:
        if self.init:
            return self.init
        return "paper-nonlinear" if self.kind == "nonlinear" else "linear-perturbation"

    def as_text(self) -> str:
        """Canonical config text; parsing it reproduces this config exactly."""
        return "".join(f"{k} = {v}\n" for k, v in self.raw)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.as_text().encode()).hexdigest()[:16]


def parse_lines(text: str, origin: str = "file") -> dict[str, tuple[str, Source]]:
    """Split ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, tuple[str, Source]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        _assign(out, key, value, Source(origin, lineno))
    return out


def _assign(out, key, value, src):
    if key in ALIASES:
        for k in ALIASES[key]:
            out[k] = (value, src)
        return
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}", line=src.line if src.origin == "file" else None)
    out[key] = (value, src)


def parse_overrides(pairs) -> dict[str, tuple[str, Source]]:
    out: dict[str, tuple[str, Source]] = {}
    for i, pair in enumerate(pairs, start=1):
        if "=" not in pair:
            raise ConfigError(f"--set #{i}: expected key=value, got {pair!r}")
        key, value = (s.strip() for s in pair.split("=", 1))
        if key not in KEYS and key not in ALIASES:
            raise ConfigError(f"--set #{i}: unknown key {key!r}")
        _assign(out, key, value, Source("set", i))
    return out


PREAMBLE_CONFIG = "# config: "


def extract_preamble(text: str) -> str | None:
    """Config lines embedded in a result CSV preamble, if any."""
    lines = [ln[len(PREAMBLE_CONFIG):] for ln in text.splitlines() if ln.startswith(PREAMBLE_CONFIG)]
    return "\n".join(lines) if lines else None


def build_config(preset: Mapping[str, str] | None = None, text: str = "",
                 overrides: Mapping[str, tuple[str, Source]] | None = None) -> ExperimentConfig:
    """Merge layers with precedence ``overrides > text > preset > defaults``."""
    merged: dict[str, tuple[str, Source]] = {k: (v[1], Source("default")) for k, v in KEYS.items()}
    for key, value in (preset or {}).items():
        _assign(merged, key, str(value), Source("preset"))
    embedded = extract_preamble(text)
    merged.update(parse_lines(embedded if embedded is not None else text))
    merged.update(overrides or {})
    return _validate(merged)


def parse_config(text: str) -> ExperimentConfig:
    return build_config(None, text, None)


def _fail(msg, *srcs):
    lines = [s.line for s in srcs if s.origin == "file" and s.line is not None]
    sets = [s for s in srcs if s.origin == "set"]
    if sets:
        raise ConfigError(f"{sets[-1].where()}: {msg}")
    raise ConfigError(msg, line=max(lines) if lines else None)


def _validate(merged) -> ExperimentConfig:
    vals = {}
    for key, (parser, *_rest) in KEYS.items():
        text, src = merged[key]
        try:
            vals[key] = parser(text)
        except (TypeError, ValueError) as exc:
            _fail(f"cannot parse {key} = {text!r}: {exc}", src)
    src = {k: merged[k][1] for k in KEYS}

    try:
        params = BrusselatorParams(vals["A"], vals["B"], vals["d_u"], vals["d_v"])
    except StobrussError as exc:
        _fail(str(exc), src["A"], src["B"], src["d_u"], src["d_v"])
    try:
        grid = SpatialGrid.from_spacing(vals["L"], vals["dx"])
    except StobrussError as exc:
        _fail(str(exc), src["L"], src["dx"])
    try:
        tg = TimeGrid(vals["T"], vals["dt"])
    except StobrussError as exc:
        _fail(str(exc), src["T"], src["dt"])
    try:
        check_cfl(params, grid, tg)
    except ConfigError as exc:
        _fail(str(exc), src["dt"], src["dx"], src["d_u"], src["d_v"])
    if vals["K"] < 1:
        _fail(f"K must be >= 1, got {vals['K']}", src["K"])
    if vals["K"] > grid.N:
        _fail(f"K={vals['K']} exceeds the N={grid.N} resolvable modes", src["K"], src["dx"], src["L"])
    for key in ("n_realizations", "record_stride"):
        if vals[key] < 1:
            _fail(f"{key} must be >= 1, got {vals[key]}", src[key])
    if vals["amplitude"] < 0:
        _fail("amplitude must be >= 0", src["amplitude"])
    t0 = 0.3 * tg.T if vals["fit_start"] is None else vals["fit_start"]
    t1 = tg.T if vals["fit_end"] is None else vals["fit_end"]
    if not 0 <= t0 < t1 <= tg.T:
        _fail(f"fit window [{t0}, {t1}] must satisfy 0 <= start < end <= T", src["fit_start"], src["fit_end"])
    for t in vals["snapshot_times"]:
        if not 0 <= t <= tg.T:
            _fail(f"snapshot time {t} outside [0, T]", src["snapshot_times"])

    # output location is not part of the experiment identity
    raw = tuple((k, _canonical(k, vals[k])) for k in KEYS if k != "out")
    return ExperimentConfig(
        params=params, noise=(vals["sigma_u"], vals["sigma_v"]), grid=grid, time=tg,
        seed=vals["seed"], preset=vals["preset"], sweep=vals["sweep"], out=vals["out"],
        record_stride=vals["record_stride"], n_realizations=vals["n_realizations"], K=vals["K"],
        kind=vals["kind"], init=vals["init"], amplitude=vals["amplitude"],
        fit_start=vals["fit_start"], fit_end=vals["fit_end"],
        snapshot_times=vals["snapshot_times"], raw=raw,
    )


def _canonical(key, value) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)
