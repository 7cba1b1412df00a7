import pytest

from optomemristor.config import (
    ConfigError,
    build_neuron,
    build_synapse,
    device_params,
    dump_config,
    get_cells,
    get_float,
    load_config,
    maze_spec,
    optics_stack,
    profiles,
)
from optomemristor.device import DeviceKind
from optomemristor.maze import MazeSpec
from optomemristor.optics import default_stack


def test_shipped_profiles(cfg):
    assert set(profiles(cfg)) == {"ag-ag-nonvolatile", "pt-ag-volatile"}
    assert device_params(cfg, "ag-ag-nonvolatile").kind is DeviceKind.NON_VOLATILE
    assert device_params(cfg, "pt-ag-volatile").kind is DeviceKind.VOLATILE


def test_overrides_win(cfg):
    assert device_params(cfg, "pt-ag-volatile", tau0=5.0).tau0 == 5.0


def test_unknown_profile(cfg):
    with pytest.raises(ConfigError):
        device_params(cfg, "cu-cu")


def test_user_file_overlays_defaults(tmp_path):
    path = tmp_path / "user.ini"
    path.write_text("[device:pt-ag-volatile]\nv_th_dark = 0.5\n\n[maze]\nmax_steps_per_trial = 12\n")
    cfg = load_config(path)
    p = device_params(cfg, "pt-ag-volatile")
    assert p.v_th_dark == 0.5 and p.v_hold == 0.1
    assert maze_spec(cfg).max_steps_per_trial == 12


@pytest.mark.parametrize("text", [
    "[device:pt-ag-volatile]\nv_th_dark = fast\n",
    "[device:pt-ag-volatile]\nflux_capacitor = 1\n",
    "[device:pt-ag-volatile]\nv_hold = 0.9\n",
    "[maze]\ntraps = 0,0; 9\n",
    "not an ini file\n",
])
def test_bad_config_is_config_error(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(ConfigError):
        cfg = load_config(path)
        device_params(cfg, "pt-ag-volatile")
        maze_spec(cfg)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/optomem.ini")


def test_missing_value_is_config_error(cfg):
    with pytest.raises(ConfigError):
        get_float(cfg, "optics", "no_such_key")
    assert get_float(cfg, "optics", "no_such_key", optional=True) is None


def test_builders_match_module_defaults(cfg):
    assert maze_spec(cfg) == MazeSpec()
    assert optics_stack(cfg) == default_stack(78)
    assert get_cells(cfg, "maze", "traps") == [(0, 0), (2, 0), (2, 2)]
    assert build_synapse(cfg).device.params.polarity_sign == -1
    n = build_neuron(cfg)
    assert n.soma_threshold == pytest.approx(0.5 * n.d1.lrs_read_current)


def test_dump_round_trip(cfg, tmp_path):
    path = tmp_path / "dump.ini"
    path.write_text(dump_config(cfg))
    again = load_config(path)
    assert {s: dict(again[s]) for s in again.sections()} == {s: dict(cfg[s]) for s in cfg.sections()}
