import json
from collections import Counter

import numpy as np
import pytest

from conftest import complete_graph, make_state, path_graph
from opinionnet import rng as rngmod
from opinionnet.config import SimConfig, parse_config
from opinionnet.engine import (
    ActionTable,
    StepLog,
    apply_log,
    assign_archetypes,
    init,
    phase_choose,
    phase_execute,
    phase_grow,
    phase_update,
    run,
    step,
)
from opinionnet.errors import ConfigError, EngineFault
from opinionnet.graph import SocialGraph, WeightInit
from opinionnet.model import NOP, Action, Archetype, MaskStore

HOM, HET, ADV = Archetype.HOM, Archetype.HET, Archetype.ADV


def small_config(**kw):
    base = dict(nodes=30, K=3, type_dist=(0.34, 0.33, 0.33), saturation=0.2, steps=15, seed=11)
    base.update(kw)
    return SimConfig(**base)


# -- config ---------------------------------------------------------------------

def test_minimal_config_gets_defaults(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"nodes": 75, "K": 4, "type_dist": [1, 0, 0], "saturation": 0.15,
                             "steps": 100, "seed": 1}))
    c = parse_config(p)
    assert (c.upd_prob, c.unf_thresh, c.unf_prob, c.friend_prob) == (0.25, 0.5, 0.9, 0.05)
    assert c.generator == "small_world" and c.mask_init == "all_visible" and c.upd_thresh == 0.0


def test_type_dist_must_sum_to_one():
    with pytest.raises(ConfigError) as e:
        small_config(type_dist=(0.5, 0.2, 0.2))
    assert "type_dist" in e.value.problems


def test_negative_steps_rejected():
    with pytest.raises(ConfigError) as e:
        small_config(steps=-1)
    assert "steps" in e.value.problems


def test_every_bad_field_is_named():
    with pytest.raises(ConfigError) as e:
        SimConfig.from_dict({"nodes": 1, "K": 0, "type_dist": [1, 0, 0], "saturation": 2,
                             "steps": 1, "seed": -3, "bogus": 1})
    assert set(e.value.problems) == {"bogus"}
    with pytest.raises(ConfigError) as e:
        SimConfig.from_dict({"nodes": 1, "K": 0, "type_dist": [1, 0, 0], "saturation": 2,
                             "steps": 1, "seed": -3})
    assert set(e.value.problems) == {"nodes", "K", "saturation", "seed"}


def test_missing_fields_named():
    with pytest.raises(ConfigError) as e:
        SimConfig.from_dict({"nodes": 10})
    assert set(e.value.problems) == {"K", "type_dist", "saturation", "steps", "seed"}


def test_type_dist_as_object_and_round_trip():
    c = SimConfig.from_dict({"nodes": 10, "K": 2, "type_dist": {"het": 1.0}, "saturation": 0.3,
                             "steps": 2, "seed": 0, "res_overrides": {"het": 0.25},
                             "weight_init": {"kind": "uniform_random"}})
    assert c.type_dist == (0.0, 1.0, 0.0)
    assert c.res_for(HET) == 0.25 and c.res_for(HOM) == 0.0
    assert SimConfig.from_dict(json.loads(c.to_json())) == c


def test_invalid_json_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{nope")
    with pytest.raises(ConfigError):
        parse_config(p)


# -- init -----------------------------------------------------------------------

def test_pure_composition():
    types = assign_archetypes(75, (1, 0, 0), np.random.default_rng(0))
    assert types == [HOM] * 75


def test_largest_remainder_counts():
    types = assign_archetypes(75, (0.7, 0.15, 0.15), np.random.default_rng(0))
    c = Counter(types)
    assert (c[HOM], c[HET], c[ADV]) == (53, 11, 11)


def test_init_is_deterministic():
    a, b = init(small_config()), init(small_config())
    assert a.same_as(b)
    assert not a.same_as(init(small_config(seed=12)))
    a.check_invariants()


def test_init_hidden_masks():
    s = init(small_config(mask_init="all_hidden"))
    assert not s.masks.m.any()


def test_init_applies_overrides():
    s = init(small_config(res_overrides={"het": 0.5}, upd_prob_overrides={"adv": 1.0}))
    for a in s.agents:
        assert a.res == (0.5 if a.archetype is HET else 0.0)
        assert a.upd_prob == (1.0 if a.archetype is ADV else 0.25)


# -- choose / execute -------------------------------------------------------------

def test_choose_nop_forced():
    s = make_state(complete_graph(4), np.ones((4, 2)), HOM, unf_prob=0.0)
    table = phase_choose(s)
    assert len(table) == 12
    for i in range(4):
        assert all(a.kind == NOP for a in table.for_agent(i))


def test_choose_isolate_no_actions():
    s = make_state(SocialGraph(3), np.ones((3, 2)), HOM)
    assert len(phase_choose(s)) == 0


def test_mutual_unfriend_single_removal():
    g = complete_graph(2)
    profile = np.array([[1, 1], [-1, -1]])
    s = make_state(g, profile, HOM, unf_prob=1.0)
    table = phase_choose(s)
    assert table.for_agent(0) == [Action.unfriend(0, 1)]
    assert table.for_agent(1) == [Action.unfriend(1, 0)]
    removed, _ = phase_execute(s, table)
    assert removed == [(0, 1)]
    assert s.graph.num_edges() == 0 and not s.masks.m.any()


def test_unfriend_drops_same_step_reveal():
    g = complete_graph(2)
    s = make_state(g, np.ones((2, 2)), HOM, masks=MaskStore(2, 2))
    table = ActionTable.from_actions([Action.unfriend(0, 1), Action.reveal(1, 0, 1)])
    removed, applied = phase_execute(s, table)
    assert removed == [(0, 1)] and applied == []
    assert not s.masks.m.any()


def test_reveal_applies_on_intact_edge():
    profile = np.array([[-1, 1], [1, 1]])
    s = make_state(complete_graph(2), profile, HOM, masks=MaskStore(2, 2))
    _, applied = phase_execute(s, ActionTable.from_actions([Action.reveal(0, 1, 0)]))
    assert applied == [(0, 1, 0)]
    assert s.masks.m[0, 1].tolist() == [-1, 0]


@pytest.mark.parametrize("action", [
    Action.reveal(0, 5, 0), Action.reveal(0, 1, 7), Action.unfriend(1, 1), Action("shout", 0, 1),
])
def test_malformed_actions_fault(action):
    s = make_state(complete_graph(2), np.ones((2, 2)), HOM)
    with pytest.raises(EngineFault):
        phase_execute(s, ActionTable.from_actions([action]))


# -- update -------------------------------------------------------------------------

def test_consensus_no_flips():
    s = make_state(complete_graph(5), np.ones((5, 3)), HOM)
    assert phase_update(s) == []


def test_hom_flips_against_both_neighbors():
    profile = np.array([[-1], [1], [-1]])
    s = make_state(path_graph(3), profile, HOM)
    assert phase_update(s) == [(1, 0, 1, -1)]
    # the mask of the flipped agent follows its new opinion
    assert s.masks.m[1, 0, 0] == -1


def test_two_adv_oscillate():
    s = make_state(complete_graph(2), np.ones((2, 3)), ADV)
    seen = [s.profile.copy()]
    for _ in range(6):
        phase_update(s)
        s.masks.check_invariants(s.graph, s.profile)
        seen.append(s.profile.copy())
    for t, p in enumerate(seen):
        assert (p == (1 if t % 2 == 0 else -1)).all()


def test_two_adv_oscillate_through_full_steps():
    s = make_state(complete_graph(2), np.ones((2, 3)), ADV, unf_prob=0.0)
    for t in range(6):
        s, _ = step(s)
        assert (s.profile == (-1 if t % 2 == 0 else 1)).all()


# -- grow ---------------------------------------------------------------------------

def test_grow_phase_zero_probability():
    s = make_state(path_graph(4), np.ones((4, 2)), HOM, friend_prob=0.0)
    assert phase_grow(s) == []
    assert s.graph == path_graph(4)


def test_grow_phase_closes_with_hidden_masks():
    s = make_state(path_graph(3), np.ones((3, 2)), HOM, friend_prob=1.0)
    assert [(i, j) for i, j, *_ in phase_grow(s)] == [(0, 2)]
    assert not s.masks.m[0, 2].any() and not s.masks.m[2, 0].any()


def test_grow_phase_complete_graph_unchanged():
    s = make_state(complete_graph(4), np.ones((4, 2)), HOM, friend_prob=1.0)
    assert phase_grow(s) == []


# -- step / run ---------------------------------------------------------------------

def test_consensus_fixed_point():
    s = make_state(complete_graph(6), np.ones((6, 4)), HOM, friend_prob=0.05)
    before = s.copy()
    s, log = step(s)
    assert s.t == 1
    before.t = 1
    assert s.same_as(before)
    assert log.unfriends == log.reveals == log.flips == log.added_edges == []


def test_step_is_deterministic():
    a, b = init(small_config()), init(small_config())
    for _ in range(5):
        a, la = step(a)
        b, lb = step(b)
        assert la == lb
    assert a.same_as(b)


def test_full_size_run_completes():
    cfg = SimConfig(nodes=75, K=4, type_dist=(0.34, 0.33, 0.33), saturation=0.15, steps=100, seed=3)
    r = run(cfg, check=True)
    assert len(r.frames) == 101 and r.trajectory.shape == (101, 75, 4)


def test_zero_steps_keeps_initial_metrics():
    r = run(small_config(steps=0))
    assert len(r.frames) == 1 and r.logs == [] and r.frames[0].t == 0
    assert r.final.same_as(r.initial)


def test_same_seed_same_serialization():
    a = json.dumps(run(small_config()).to_json(), sort_keys=True)
    b = json.dumps(run(small_config()).to_json(), sort_keys=True)
    assert a == b


def test_replicas_differ():
    finals = {run(small_config(seed=s)).trajectory.tobytes() for s in range(10)}
    assert len(finals) == 10


def test_log_replay_reproduces_run():
    r = run(small_config(weight_init=WeightInit("uniform_random")))
    state = r.initial.copy()
    for log in r.logs:
        log = StepLog.from_json(json.loads(json.dumps(log.to_json())))
        state = apply_log(state, log)
    assert state.same_as(r.final)


def test_log_replay_rejects_wrong_step():
    r = run(small_config(steps=2))
    with pytest.raises(ValueError):
        apply_log(r.initial.copy(), r.logs[1])


def test_invariants_hold_with_random_weights():
    run(small_config(weight_init=WeightInit("uniform_random"), mask_init="all_hidden", steps=20), check=True)


def test_custom_policy_gets_own_stream():
    calls = []

    def always_reveal(i, state, rng):
        calls.append((state.t, i, rng.random()))
        return [Action.reveal(i, int(j), 0) for j in state.graph.neighbors(i)]

    cfg = small_config(mask_init="all_hidden", steps=3)
    r = run(cfg, policies={HET: always_reveal})
    het = [i for i, a in enumerate(r.archetypes) if a is HET]
    assert {i for _, i, _ in calls} <= set(het)
    t, i, x = calls[0]
    assert x == rngmod.stream(cfg.seed, rngmod.STEP, t, rngmod.CHOOSE, i).random()
    for log in r.logs:
        for j in het:
            assert all(a.kind == "reveal" for a in log.actions_of(j))


def test_policy_acting_for_another_agent_faults():
    def rogue(i, state, rng):
        return [Action.nop(i + 1, i)]

    s = init(small_config(), policies={HOM: rogue})
    with pytest.raises(EngineFault):
        step(s)
