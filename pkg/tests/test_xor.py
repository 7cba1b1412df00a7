import numpy as np
import pytest

from optomemristor.config import build_neuron
from optomemristor.neuro import DendriticNeuron
from optomemristor.xor import INPUT_PAIRS, run_xor, threshold_plane_data, xor_truth


@pytest.fixture
def neuron(cfg):
    return build_neuron(cfg)


def test_truth_function():
    assert [xor_truth(x, y) for x, y in INPUT_PAIRS] == [0, 1, 1, 0]


def test_run_xor_defaults(neuron):
    report = run_xor(neuron, range(5))
    assert report.all_passed and report.n_passed == 5
    for evs in report.rows.values():
        assert [e.output for e in evs] == [0, 1, 1, 0]
        for e in evs:
            assert e.output == int(e.i_sum > report.soma_threshold)
            assert e.i_sum == e.i_d1 + e.i_d2


def test_run_xor_needs_seeds(neuron):
    with pytest.raises(ValueError):
        run_xor(neuron, [])


def test_high_threshold_silences_neuron(neuron):
    loud = DendriticNeuron(neuron.d1, neuron.d2, 2.5 * neuron.d1.lrs_read_current)
    report = run_xor(loud, [0])
    assert all(e.output == 0 for e in report.rows[0])


def test_zero_threshold_is_strict(neuron):
    zero = DendriticNeuron(neuron.d1, neuron.d2, 0.0)
    out = {(e.x, e.y): e.output for e in run_xor(zero, [0]).rows[0]}
    assert out == {(0, 0): 0, (1, 0): 1, (0, 1): 1, (1, 1): 1}


def test_threshold_plane(neuron):
    plane = {(x, y): i for x, y, i in threshold_plane_data(neuron)}
    assert plane[(1, 1)] < plane[(1, 0)]
    assert plane[(0, 0)] == pytest.approx(0.0, abs=1e-15)
    assert plane[(1, 0)] == plane[(0, 1)]


def test_margin_grows_with_inhibitory_power(cfg):
    # strict shunting region only: 0.8 * V_th_eff(P) > pulse amplitude
    powers = [1.5e-3, 2e-3, 3e-3, 5e-3]
    margins = [run_xor(build_neuron(cfg, inhib_power=p), range(3)).min_margin for p in powers]
    assert all(m > 0 for m in margins)
    assert all(a < b for a, b in zip(margins, margins[1:]))


def test_seed_determinism(neuron, cfg):
    a = run_xor(neuron, [4]).rows[4]
    b = run_xor(build_neuron(cfg), [4]).rows[4]
    assert a == b
    assert np.isfinite([e.i_sum for e in a]).all()
