"""Flat INI configuration: shipped defaults, user overrides, typed accessors."""

from __future__ import annotations

import configparser
import io
from importlib import resources
from pathlib import Path

from .device import DeviceParams

DEVICE_PREFIX = "device:"


class ConfigError(ValueError):
    pass


def _defaults_text() -> str:
    return resources.files("optomemristor").joinpath("data/defaults.ini").read_text("utf-8")


def load_config(path: str | Path | None = None) -> configparser.ConfigParser:
    """Shipped defaults, overlaid with ``path`` when given."""
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cfg.optionxform = str
    cfg.read_string(_defaults_text(), source="<defaults>")
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            cfg.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return cfg


def dump_config(cfg: configparser.ConfigParser) -> str:
    buf = io.StringIO()
    cfg.write(buf)
    return buf.getvalue()


def profiles(cfg: configparser.ConfigParser) -> list[str]:
    return [s[len(DEVICE_PREFIX):] for s in cfg.sections() if s.startswith(DEVICE_PREFIX)]


_FLOAT_KEYS = ("v_th_dark", "v_hold", "g_hrs", "g_lrs", "k_vth", "k_v0", "p_ref", "tau0",
               "v_c", "tau_relax", "p_volatile", "i_compliance")


def device_params(cfg: configparser.ConfigParser, profile: str, **overrides) -> DeviceParams:
    section = DEVICE_PREFIX + profile
    if not cfg.has_section(section):
        raise ConfigError(f"unknown device profile {profile!r}; known: {', '.join(profiles(cfg))}")
    raw = dict(cfg[section])
    kwargs: dict = {}
    try:
        for key, value in raw.items():
            value = value.strip()
            if key in _FLOAT_KEYS:
                kwargs[key] = float(value) if value else None
            elif key in ("polarity_sign", "n_intermediate"):
                kwargs[key] = int(value)
            elif key == "kind":
                kwargs[key] = value
            else:
                raise ConfigError(f"[{section}] unknown key {key!r}")
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        kwargs.update(overrides)
        return DeviceParams(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def get_float(cfg, section: str, key: str, optional: bool = False) -> float | None:
    """Float value; an empty or missing key is an error unless ``optional``."""
    value = cfg.get(section, key, fallback="").strip()
    if not value:
        if optional:
            return None
        raise ConfigError(f"[{section}] {key}: missing value")
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: not a number: {value!r}") from exc


def get_floats(cfg, section: str, key: str) -> list[float]:
    raw = cfg.get(section, key, fallback="")
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def get_cell(cfg, section: str, key: str) -> tuple[int, int]:
    raw = cfg.get(section, key)
    try:
        r, c = (int(x) for x in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: expected 'row,col', got {raw!r}") from exc
    return r, c


def get_cells(cfg, section: str, key: str) -> list[tuple[int, int]]:
    raw = cfg.get(section, key, fallback="")
    cells = []
    for chunk in raw.split(";"):
        if chunk.strip():
            try:
                r, c = (int(x) for x in chunk.split(","))
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: bad cell {chunk!r}") from exc
            cells.append((r, c))
    return cells


# -- builders ----------------------------------------------------------------

def synapse_protocol(cfg) -> dict:
    s = "synapse"
    return {
        "bias_voltage": get_float(cfg, s, "bias_voltage"),
        "flag_power": get_float(cfg, s, "flag_power"),
        "reward_amplitude": get_float(cfg, s, "reward_amplitude"),
        "reward_width": get_float(cfg, s, "reward_width"),
    }


def dendrite_protocol(cfg) -> dict:
    s = "dendrite"
    return {
        "excit_amplitude": get_float(cfg, s, "excit_amplitude"),
        "excit_width": get_float(cfg, s, "excit_width"),
        "inhib_power": get_float(cfg, s, "inhib_power"),
    }


def build_synapse(cfg):
    from .neuro import ThreeFactorSynapse

    params = device_params(cfg, cfg.get("synapse", "profile"))
    return ThreeFactorSynapse.from_params(params, **synapse_protocol(cfg))


def build_neuron(cfg, **overrides):
    from .neuro import DendriticNeuron

    params = device_params(cfg, cfg.get("dendrite", "profile"))
    protocol = dendrite_protocol(cfg)
    protocol.update(overrides)
    thr = protocol.pop("soma_threshold", None)
    if thr is None:
        thr = get_float(cfg, "dendrite", "soma_threshold", optional=True)
    return DendriticNeuron.build(params, soma_threshold=thr, **protocol)


def maze_spec(cfg):
    from .maze import MazeSpec

    s = "maze"
    try:
        return MazeSpec(
            rows=cfg.getint(s, "rows"),
            cols=cfg.getint(s, "cols"),
            start=get_cell(cfg, s, "start"),
            cheese=get_cell(cfg, s, "cheese"),
            traps=frozenset(get_cells(cfg, s, "traps")),
            max_steps_per_trial=cfg.getint(s, "max_steps_per_trial"),
        )
    except ValueError as exc:
        raise ConfigError(f"[maze] {exc}") from exc


def epsilon_schedule(cfg):
    from .maze import linear_epsilon

    return linear_epsilon(get_float(cfg, "maze", "epsilon_start"),
                          get_float(cfg, "maze", "epsilon_end"),
                          get_float(cfg, "maze", "decay_fraction"))


def optics_stack(cfg):
    from .optics import Layer, LayerStack

    s = "optics"
    layers = []
    for chunk in cfg.get(s, "layers").split(","):
        if not chunk.strip():
            continue
        try:
            name, thickness = chunk.split(":")
            layers.append(Layer(name.strip(), float(thickness)))
        except ValueError as exc:
            raise ConfigError(f"[optics] bad layer {chunk.strip()!r}: {exc}") from exc
    return LayerStack(cfg.get(s, "ambient").strip(), tuple(layers), cfg.get(s, "substrate").strip())
