from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optomemristor.config import build_neuron, synapse_protocol
from optomemristor.neuro import (
    DendriticNeuron,
    ShuntingDendrite,
    ThreeFactorSynapse,
)

from .oracles import eligibility_oracle


@pytest.fixture
def synapse(cfg, nv_params):
    return ThreeFactorSynapse.from_params(nv_params, **synapse_protocol(cfg))


@pytest.fixture
def dendrite(vol_params):
    return ShuntingDendrite.from_params(vol_params)


# -- three-factor synapse ----------------------------------------------------

def test_synapse_mounts_inverted(synapse):
    assert synapse.device.params.polarity_sign == -1
    assert synapse.conductance == synapse.device.params.g_hrs


def test_eligibility_countdown(synapse):
    assert synapse.raise_eligibility().eligibility_remaining == 3
    synapse.tick_eligibility()
    assert synapse.eligibility_remaining == 2
    synapse.raise_eligibility()
    assert synapse.eligibility_remaining == 3
    for _ in range(5):
        synapse.tick_eligibility()
    assert synapse.eligibility_remaining == 0


def test_ticking_does_not_touch_device(synapse):
    before = synapse.device.state
    synapse.raise_eligibility().tick_eligibility().tick_eligibility()
    assert synapse.device.state == before


def test_eligible_reward_potentiates(synapse, rng):
    synapse.raise_eligibility()
    assert synapse.apply_reward(rng) is True
    assert synapse.conductance == pytest.approx(synapse.device.params.g_lrs)
    assert synapse.eligibility_remaining == 0  # cleared on reward
    assert synapse.apply_reward(rng) is False  # already potentiated


def test_ineligible_reward_does_nothing(synapse, rng):
    assert synapse.apply_reward(rng) is False
    assert synapse.conductance == synapse.device.params.g_hrs


def test_light_without_reward_never_switches(synapse, rng):
    for _ in range(100):
        synapse.expose(10e-6, rng)
    assert not synapse.potentiated and synapse.device.state.step_index == 0


def test_potentiated_synapse_survives_flag_light(synapse, rng):
    synapse.raise_eligibility()
    synapse.apply_reward(rng)
    synapse.expose(1e-3, rng)  # light at the standing bias
    assert synapse.potentiated


def test_expired_window_blocks_reward(synapse, rng):
    synapse.raise_eligibility()
    for _ in range(3):
        synapse.tick_eligibility()
    assert synapse.apply_reward(rng) is False


@pytest.mark.parametrize("bad", [
    dict(reward_amplitude=0.5),    # inside the dark band
    dict(reward_amplitude=0.2),    # below the flagged threshold
    dict(reward_width=1e-9),       # too short for a reliable switch
    dict(bias_voltage=0.2),        # bias alone would switch a flagged cell
])
def test_synapse_protocol_checks(nv_params, bad):
    with pytest.raises(ValueError):
        ThreeFactorSynapse.from_params(nv_params, **bad)


def test_synapse_needs_nonvolatile(vol_params):
    from optomemristor.device import Optomemristor

    with pytest.raises(ValueError):
        ThreeFactorSynapse(Optomemristor(replace(vol_params, polarity_sign=-1)))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(["flag", "tick", "reward"]), max_size=15), st.integers(0, 2**32 - 1))
def test_schedule_matches_oracle(cfg, nv_params, ops, seed):
    s = ThreeFactorSynapse.from_params(nv_params, **synapse_protocol(cfg))
    rng = np.random.default_rng(seed)
    for op in ops:
        {"flag": s.raise_eligibility, "tick": s.tick_eligibility,
         "reward": lambda: s.apply_reward(rng)}[op]()
    assert s.potentiated == eligibility_oracle(ops)


def test_population_reward_hits_only_eligible(cfg, nv_params, rng):
    pop = [ThreeFactorSynapse.from_params(nv_params, **synapse_protocol(cfg)) for _ in range(40)]
    chosen = set(rng.choice(40, size=13, replace=False).tolist())
    for i in chosen:
        pop[i].raise_eligibility()
    switched = {i for i, s in enumerate(pop) if s.apply_reward(rng)}
    assert switched == chosen


# -- shunting dendrite -------------------------------------------------------

def test_dendrite_truth_table(dendrite, rng):
    high = dendrite.response(1, 0, rng)
    assert high == pytest.approx(dendrite.lrs_read_current)
    assert dendrite.device.state.step_index == 0  # relaxed for reuse
    low = dendrite.response(1, 1, rng)
    assert 0 <= low < 1e-3 * high
    assert dendrite.response(0, 1, rng) == 0.0
    assert dendrite.response(0, 0, rng) == 0.0


def test_light_alone_adds_no_steps(dendrite, rng):
    for _ in range(20):
        dendrite.response(0, 1, rng)
        assert dendrite.device.state.step_index == 0
    assert not dendrite.device.events


def test_dendrite_checks(vol_params):
    with pytest.raises(ValueError):
        ShuntingDendrite.from_params(vol_params, excit_amplitude=0.3)
    with pytest.raises(ValueError):
        ShuntingDendrite.from_params(vol_params, inhib_power=1e-4)
    with pytest.raises(ValueError):
        ShuntingDendrite.from_params(replace(vol_params, polarity_sign=-1))


def test_shunt_strictness(vol_params):
    assert ShuntingDendrite.from_params(vol_params, inhib_power=2e-3).shunt_is_strict
    # above the pulse but inside the staircase band: allowed, not strict
    assert not ShuntingDendrite.from_params(vol_params, inhib_power=0.8e-3).shunt_is_strict


# -- neuron ------------------------------------------------------------------

def test_neuron_xor(cfg, rng):
    n = build_neuron(cfg)
    assert [n.output(x, y, rng) for x, y in ((0, 0), (1, 0), (0, 1), (1, 1))] == [0, 1, 1, 0]


def test_neuron_default_threshold(vol_params):
    n = DendriticNeuron.build(vol_params)
    assert n.soma_threshold == pytest.approx(0.5 * n.d1.lrs_read_current)


def test_neuron_threshold_range(vol_params):
    for thr in (0.0, 1.0):
        with pytest.raises(ValueError):
            DendriticNeuron.build(vol_params, soma_threshold=thr)
