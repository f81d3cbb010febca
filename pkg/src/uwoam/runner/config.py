"""Experiment configuration: a flat, sectioned key=value text file.

Every key has a default, so an empty file is a valid config.  Seeds for the
turbulence and the camera are not configurable; they are derived from
``master_seed`` (see ``uwoam.runner.pipeline``).
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

from ..calibration import CALIBRATED_TILT_RMS
from ..channel import ChannelSpec, TurbulenceSpec
from ..detector import DetectorSpec
from ..modes import GridSpec, LGModeSpec, SamplingError, SuperpositionSpec, check_sampling
from ..source import PureState, SourceSpec, State

# section -> key -> (type, default, help)
SCHEMA: dict[str, dict[str, tuple[type, object, str]]] = {
    "experiment": {
        "master_seed": (int, 20190327, "root of every random draw"),
        "frames_per_state": (int, 25, "frames rendered per sent state"),
        "output_dir": (str, "run", "relative paths resolve against the config file"),
        "states": (str, ", ".join(f"sup:1:{45 * k:g}" for k in range(8)),
                   "comma-separated sup:<l>:<theta_deg>[:<weight>] or pure:<l>"),
        "workers": (int, 1, "processes for frame rendering; output does not depend on it"),
    },
    "source": {
        "power": (float, 1e-7, "W at the water interface; 1.898e-10 W is 0.51 photons/ns"),
        "wavelength": (float, 532e-9, "m"),
        "slot": (float, 1e-9, "s"),
        "waist": (float, 2e-3, "launch beam waist, m"),
    },
    "grid": {
        "n": (int, 256, "samples per side"),
        "extent": (float, 0.048, "side length, m"),
    },
    "channel": {
        "length": (float, 55.0, "m"),
        "extinction": (float, 0.16, "1/m"),
        "tilt_rms": (float, CALIBRATED_TILT_RMS, "per-axis launch pointing jitter, rad"),
    },
    "turbulence": {
        "cn2": (float, TurbulenceSpec.cn2, "m^(-2/3)"),
        "outer_scale": (float, TurbulenceSpec.outer_scale, "m"),
        "inner_scale": (float, TurbulenceSpec.inner_scale, "m"),
        "screen_count": (int, TurbulenceSpec.screen_count, "phase screens along the link"),
    },
    "detector": {
        "pixels": (int, 512, "sensor side, pixels"),
        "pitch": (float, 1e-4, "m per pixel, referred to the receiver plane"),
        "exposure": (float, 0.03, "s"),
        "qe": (float, 0.25, "quantum efficiency"),
        "background": (float, 0.01, "mean counts per pixel per frame"),
    },
    "analysis": {
        "threshold_fraction": (float, 0.5, "petal threshold as a fraction of the peak"),
        "smoothing_passes": (int, 2, "3x3 box passes before thresholding"),
    },
}


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in problems))
        self.problems = problems


def parse_state(token: str) -> State:
    parts = [p.strip() for p in token.strip().split(":")]
    kind = parts[0].lower()
    if kind == "pure" and len(parts) == 2:
        return PureState(int(parts[1]))
    if kind == "sup" and len(parts) in (3, 4):
        weight = float(parts[3]) if len(parts) == 4 else 0.5
        return SuperpositionSpec(int(parts[1]), math.radians(float(parts[2])), weight)
    raise ValueError(f"cannot parse state {token!r}")


def format_state(state: State) -> str:
    if isinstance(state, PureState):
        return f"pure:{state.ell}"
    text = f"sup:{state.ell}:{math.degrees(state.theta):g}"
    return text if state.weight == 0.5 else f"{text}:{state.weight:g}"


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceSpec = field(default_factory=lambda: SourceSpec(1e-7))
    waist: float = 2e-3
    grid: GridSpec = GridSpec(256, 0.048)
    channel: ChannelSpec = field(default_factory=lambda: ChannelSpec(tilt_rms=CALIBRATED_TILT_RMS))
    detector: DetectorSpec = DetectorSpec()
    sent_states: tuple = tuple(SuperpositionSpec(1, math.radians(45 * k)) for k in range(8))
    frames_per_state: int = 25
    master_seed: int = 20190327
    output_dir: Path = Path("run")
    threshold_fraction: float = 0.5
    smoothing_passes: int = 2
    workers: int = 1

    def __post_init__(self):
        if self.frames_per_state < 1:
            raise ValueError("frames_per_state must be >= 1")
        if not self.sent_states:
            raise ValueError("at least one sent state is required")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def with_output(self, path: Union[str, os.PathLike]) -> "ExperimentConfig":
        return replace(self, output_dir=Path(path))


def _raw_values(parser: configparser.ConfigParser, problems: list[str]) -> dict[str, dict[str, object]]:
    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
    for section, keys in SCHEMA.items():
        values[section] = {}
        present = parser[section] if parser.has_section(section) else {}
        for key in present:
            if key not in keys:
                problems.append(f"unknown key {section}.{key}")
        for key, (typ, default, _) in keys.items():
            if key not in present:
                values[section][key] = default
                continue
            text = present[key]
            try:
                values[section][key] = typ(float(text)) if typ is int and "e" in text.lower() else typ(text)
            except ValueError:
                problems.append(f"{section}.{key}: cannot read {text!r} as {typ.__name__}")
                values[section][key] = default
    return values


def parse_config(text: str, base_dir: Union[str, os.PathLike, None] = None) -> ExperimentConfig:
    """Build a config from text; raises ConfigError listing every problem found."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    problems: list[str] = []
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from None
    v = _raw_values(parser, problems)

    def build(label, fn):
        try:
            return fn()
        except (ValueError, TypeError) as exc:
            problems.append(f"{label}: {exc}")
            return None

    ex, so, gr, chn, tu, de, an = (v[s] for s in
                                   ("experiment", "source", "grid", "channel", "turbulence", "detector", "analysis"))
    states = []
    for token in str(ex["states"]).split(","):
        if token.strip():
            st = build(f"experiment.states {token.strip()!r}", lambda t=token: parse_state(t))
            if st is not None:
                states.append(st)
    grid = build("grid", lambda: GridSpec(gr["n"], gr["extent"]))
    turb = build("turbulence", lambda: TurbulenceSpec(tu["cn2"], tu["outer_scale"], tu["inner_scale"], tu["screen_count"]))
    channel = build("channel", lambda: ChannelSpec(chn["length"], chn["extinction"], so["wavelength"],
                                                    turb or TurbulenceSpec(), chn["tilt_rms"]))
    detector = build("detector", lambda: DetectorSpec(de["pixels"], de["pitch"], de["exposure"], de["qe"],
                                                      de["background"]))
    source = build("source", lambda: SourceSpec(so["power"], so["wavelength"], so["slot"]))
    if not so["waist"] > 0:
        problems.append("source.waist must be positive")
    if not 0 < an["threshold_fraction"] < 1:
        problems.append("analysis.threshold_fraction must lie in (0, 1)")
    if an["smoothing_passes"] < 0:
        problems.append("analysis.smoothing_passes must be >= 0")
    if grid is not None and so["waist"] > 0:
        for st in states:
            ell = st.ell
            try:
                check_sampling(LGModeSpec(ell, 0, so["waist"], so["wavelength"]), grid)
            except SamplingError as exc:
                problems.append(f"state {format_state(st)}: {exc}")

    out = Path(str(ex["output_dir"]))
    if base_dir is not None and not out.is_absolute():
        out = Path(base_dir) / out
    cfg = build("experiment", lambda: ExperimentConfig(
        source=source, waist=so["waist"], grid=grid, channel=channel, detector=detector,
        sent_states=tuple(states), frames_per_state=ex["frames_per_state"], master_seed=ex["master_seed"],
        output_dir=out, threshold_fraction=an["threshold_fraction"], smoothing_passes=an["smoothing_passes"],
        workers=ex["workers"]))
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path: Union[str, os.PathLike]) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def validate_config(path: Union[str, os.PathLike]) -> list[str]:
    """Itemized problems with a config file; empty when it is runnable."""
    path = Path(path)
    if not path.is_file():
        return [f"no such file: {path}"]
    try:
        cfg = load_config(path)
    except ConfigError as exc:
        return exc.problems
    out = cfg.output_dir
    probe = out if out.exists() else next((p for p in out.parents if p.exists()), Path("."))
    if not os.access(probe, os.W_OK):
        return [f"output directory {out} is not writable"]
    return []


def config_to_text(cfg: ExperimentConfig) -> str:
    """Canonical text for a config; parse_config(config_to_text(c)) reproduces c."""
    sections = {
        "experiment": {
            "master_seed": cfg.master_seed,
            "frames_per_state": cfg.frames_per_state,
            "output_dir": cfg.output_dir.as_posix(),
            "states": ", ".join(format_state(s) for s in cfg.sent_states),
            "workers": cfg.workers,
        },
        "source": {"power": cfg.source.power, "wavelength": cfg.source.wavelength,
                   "slot": cfg.source.slot, "waist": cfg.waist},
        "grid": {"n": cfg.grid.n, "extent": cfg.grid.extent},
        "channel": {"length": cfg.channel.length, "extinction": cfg.channel.extinction,
                    "tilt_rms": cfg.channel.tilt_rms},
        "turbulence": {"cn2": cfg.channel.turbulence.cn2, "outer_scale": cfg.channel.turbulence.outer_scale,
                       "inner_scale": cfg.channel.turbulence.inner_scale,
                       "screen_count": cfg.channel.turbulence.screen_count},
        "detector": {"pixels": cfg.detector.pixels, "pitch": cfg.detector.pitch, "exposure": cfg.detector.exposure,
                     "qe": cfg.detector.qe, "background": cfg.detector.background},
        "analysis": {"threshold_fraction": cfg.threshold_fraction, "smoothing_passes": cfg.smoothing_passes},
    }
    lines = []
    for name, items in sections.items():
        lines.append(f"[{name}]")
        lines += [f"{k} = {val!r}" if isinstance(val, float) else f"{k} = {val}" for k, val in items.items()]
        lines.append("")
    return "\n".join(lines)


def schema_text() -> str:
    """Documented defaults, usable as a starting config."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (_, default, help_) in keys.items():
            lines.append(f"# {help_}")
            lines.append(f"{key} = {default!r}" if isinstance(default, float) else f"{key} = {default}")
        lines.append("")
    return "\n".join(lines)
