"""Synchronous four-phase simulation loop.

Each step: (1) every agent picks one action per neighbor from the state at
the end of the previous step, (2) unfriends are applied, then reveals,
(3) all opinions update simultaneously from the post-action state, and
(4) the network closes triads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import rng as rngmod
from .config import SimConfig
from .errors import EngineFault
from .graph import GenSpec, SocialGraph, generate, grow
from .metrics import MetricFrame, OutcomeFlags, metric_frame, outcome_flags
from .model import (
    ARCHETYPES,
    KIND_NAMES,
    KIND_NOP,
    KIND_REVEAL,
    KIND_UNFRIEND,
    NOP,
    REVEAL,
    UNFRIEND,
    Action,
    AgentSpec,
    Archetype,
    MaskStore,
    aggregate_profile,
    default_policy_all,
    flip_mask,
    neighborhood_rewards,
    random_profile,
)

# A custom policy sees the whole (read-only) state and gets its own stream.
Policy = Callable[[int, "SimState", np.random.Generator], Sequence[Action]]


def assign_archetypes(n: int, type_dist, rng: np.random.Generator) -> list[Archetype]:
    """Largest-remainder rounding of ``type_dist * n``, then a seeded shuffle."""
    quotas = np.asarray(type_dist, dtype=float) * n
    counts = np.floor(quotas).astype(int)
    remainders = quotas - counts
    # ties go to the earlier archetype (stable sort)
    for idx in np.argsort(-remainders, kind="stable")[: n - counts.sum()]:
        counts[idx] += 1
    labels = [a for a, c in zip(ARCHETYPES, counts) for _ in range(c)]
    order = rng.permutation(n)
    return [labels[k] for k in order]


@dataclass
class SimState:
    t: int
    graph: SocialGraph
    profile: np.ndarray
    masks: MaskStore
    self_weights: np.ndarray
    agents: list[AgentSpec]
    config: SimConfig
    policies: dict = field(default_factory=dict)

    def __post_init__(self):
        self._tabulate()

    def _tabulate(self):
        a = self.agents
        self.codes = np.array([s.archetype.code for s in a], dtype=np.int8)
        self.res = np.array([s.res for s in a])
        self.upd_prob = np.array([s.upd_prob for s in a])
        self.unf_prob = np.array([s.unf_prob for s in a])
        self.unf_thresh = np.array([s.unf_thresh for s in a])
        self.can_unfriend = np.array([UNFRIEND in s.actions for s in a])
        self.can_reveal = np.array([REVEAL in s.actions for s in a])

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def K(self) -> int:
        return self.profile.shape[1]

    @property
    def archetypes(self) -> list[Archetype]:
        return [s.archetype for s in self.agents]

    def copy(self) -> "SimState":
        return SimState(self.t, self.graph.copy(), self.profile.copy(), self.masks.copy(),
                        self.self_weights.copy(), list(self.agents), self.config, dict(self.policies))

    def same_as(self, other: "SimState") -> bool:
        return (
            self.t == other.t
            and self.graph == other.graph
            and np.array_equal(self.profile, other.profile)
            and self.masks == other.masks
            and self.agents == other.agents
        )

    def check_invariants(self) -> None:
        self.graph.check_invariants()
        assert set(np.unique(self.profile).tolist()) <= {-1, 1}
        self.masks.check_invariants(self.graph, self.profile)

    def rewards(self) -> np.ndarray:
        return neighborhood_rewards(self.graph, self.profile, self.masks, self.codes)


def init(config: SimConfig, policies: Mapping[Archetype, Policy] | None = None) -> SimState:
    """Build the initial state. Deterministic in ``config`` (which carries the seed)."""
    config.validate()
    seed, n, K = config.seed, config.nodes, config.K
    spec = GenSpec(config.generator, n, config.saturation,
                   seed=rngmod.derive_seed(seed, rngmod.INIT, rngmod.GRAPH))
    graph = generate(spec, config.weight_init)
    types = assign_archetypes(n, config.type_dist, rngmod.stream(seed, rngmod.INIT, rngmod.ARCHETYPES))
    profile = random_profile(n, K, rngmod.stream(seed, rngmod.INIT, rngmod.OPINIONS))
    masks = MaskStore.visible(graph, profile) if config.mask_init == "all_visible" else MaskStore(n, K)
    agents = [
        AgentSpec(
            archetype=a,
            res=config.res_for(a),
            upd_prob=config.upd_prob_for(a),
            unf_prob=config.unf_prob,
            unf_thresh=config.unf_thresh,
        )
        for a in types
    ]
    return SimState(0, graph, profile, masks, np.ones(n), agents, config, dict(policies or {}))


# -- phase 1 ------------------------------------------------------------------

@dataclass
class ActionTable:
    """Chosen actions as parallel arrays, one row per (actor, neighbor) pair."""

    actor: np.ndarray
    target: np.ndarray
    kind: np.ndarray
    topic: np.ndarray

    def __len__(self):
        return self.actor.size

    def for_agent(self, i: int) -> list[Action]:
        rows = np.flatnonzero(self.actor == i)
        return [Action(KIND_NAMES[int(self.kind[r])], i, int(self.target[r]), int(self.topic[r]))
                for r in rows]

    def of_kind(self, kind: int) -> np.ndarray:
        sel = self.kind == kind
        return np.stack([self.actor[sel], self.target[sel], self.topic[sel]], axis=1)

    @classmethod
    def from_actions(cls, actions: Sequence[Action]) -> "ActionTable":
        codes = {NOP: KIND_NOP, REVEAL: KIND_REVEAL, UNFRIEND: KIND_UNFRIEND}
        try:
            kinds = [codes[a.kind] for a in actions]
        except KeyError as e:
            raise EngineFault(f"unknown action kind {e}") from None
        return cls(
            np.array([a.actor for a in actions], dtype=np.int64),
            np.array([a.target for a in actions], dtype=np.int64),
            np.array(kinds, dtype=np.int8),
            np.array([a.topic if a.kind == REVEAL else -1 for a in actions], dtype=np.int64),
        )

    @classmethod
    def concat(cls, tables: Sequence["ActionTable"]) -> "ActionTable":
        return cls(*(np.concatenate([getattr(t, f) for t in tables])
                     for f in ("actor", "target", "kind", "topic")))


def choice_draws(state: SimState) -> np.ndarray:
    """The ``(3, n, n)`` uniform block for this step's default policies."""
    return rngmod.stream(state.config.seed, rngmod.STEP, state.t, rngmod.CHOOSE).random((3, state.n, state.n))


def phase_choose(state: SimState) -> ActionTable:
    g = state.graph
    kind, topic = default_policy_all(
        g, state.profile, state.masks, state.codes, state.unf_thresh, state.unf_prob,
        state.can_unfriend, state.can_reveal, choice_draws(state),
    )
    custom = np.array([a.archetype in state.policies for a in state.agents])
    actor, target = np.nonzero(g.adj & ~custom[:, None])
    tables = [ActionTable(actor, target, kind[actor, target], topic[actor, target])]
    for i in np.flatnonzero(custom).tolist():
        policy = state.policies[state.agents[i].archetype]
        agent_rng = rngmod.stream(state.config.seed, rngmod.STEP, state.t, rngmod.CHOOSE, i)
        chosen = list(policy(i, state, agent_rng))
        for a in chosen:
            if a.actor != i:
                raise EngineFault(f"policy for agent {i} emitted an action for agent {a.actor}")
        if chosen:
            tables.append(ActionTable.from_actions(chosen))
    return ActionTable.concat(tables)


# -- phase 2 ------------------------------------------------------------------

def _validate(state: SimState, actions: ActionTable) -> None:
    n, K = state.n, state.K
    bad_node = (actions.actor < 0) | (actions.actor >= n) | (actions.target < 0) | (actions.target >= n)
    if bad_node.any():
        r = int(np.flatnonzero(bad_node)[0])
        raise EngineFault(f"action references unknown node: {actions.actor[r]} -> {actions.target[r]}")
    if (actions.actor == actions.target).any():
        raise EngineFault("action targets its own actor")
    rev = actions.kind == KIND_REVEAL
    if ((actions.topic[rev] < 0) | (actions.topic[rev] >= K)).any():
        raise EngineFault(f"reveal topic outside [0, {K})")
    if not np.isin(actions.kind, (KIND_NOP, KIND_REVEAL, KIND_UNFRIEND)).all():
        raise EngineFault("unknown action kind")


def phase_execute(state: SimState, actions: ActionTable) -> tuple[list, list]:
    """Apply unfriends, then reveals in (actor, target, topic) order.

    Returns ``(removed_edges, applied_reveals)``. Reveals whose edge vanished
    in this phase are dropped.
    """
    _validate(state, actions)
    g, masks = state.graph, state.masks
    removed = []
    for i, j, _ in sorted(map(tuple, actions.of_kind(KIND_UNFRIEND).tolist())):
        if g.remove_edge(i, j):
            removed.append((min(i, j), max(i, j)))
        masks.clear(i, j)
    applied = []
    for i, j, k in sorted(map(tuple, actions.of_kind(KIND_REVEAL).tolist())):
        if masks.reveal(i, j, k, state.profile, g):
            applied.append((i, j, k))
    return sorted(removed), applied


# -- phase 3 ------------------------------------------------------------------

def phase_update(state: SimState) -> list[tuple[int, int, int, int]]:
    """Simultaneous opinion update; returns flips as ``(agent, topic, old, new)``."""
    agg = aggregate_profile(state.graph, state.profile, state.masks, state.self_weights)
    u = rngmod.stream(state.config.seed, rngmod.STEP, state.t, rngmod.UPDATE).random((state.n, state.K))
    flips = flip_mask(state.codes, state.profile, agg, state.res, state.upd_prob, u)
    idx = np.argwhere(flips)
    old = state.profile[flips].copy()
    state.profile[flips] *= -1
    state.masks.sync(state.profile)
    return [(int(i), int(k), int(o), int(-o)) for (i, k), o in zip(idx, old)]


# -- phase 4 ------------------------------------------------------------------

def phase_grow(state: SimState) -> list[tuple[int, int, float, float]]:
    """Triadic closure. New edges start with zeroed masks in both directions."""
    g = state.graph
    r = rngmod.stream(state.config.seed, rngmod.STEP, state.t, rngmod.GROW)
    added = grow(g, state.config.friend_prob, r, state.config.weight_init)
    for i, j in added:
        state.masks.clear(i, j)
    return [(i, j, float(g.weights[i, j]), float(g.weights[j, i])) for i, j in added]


# -- step / run ---------------------------------------------------------------

@dataclass
class StepLog:
    t: int
    unfriends: list  # chosen (actor, target)
    reveals: list  # chosen (actor, target, topic)
    removed_edges: list
    applied_reveals: list
    flips: list
    added_edges: list  # (i, j, w_ij, w_ji)
    rewards: list

    def actions_of(self, i: int) -> list[Action]:
        """Non-NOP actions agent ``i`` chose; every other neighbor got a NOP."""
        out = [Action.unfriend(a, b) for a, b in self.unfriends if a == i]
        out += [Action.reveal(a, b, k) for a, b, k in self.reveals if a == i]
        return out

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "unfriends": [list(x) for x in self.unfriends],
            "reveals": [list(x) for x in self.reveals],
            "removed_edges": [list(x) for x in self.removed_edges],
            "applied_reveals": [list(x) for x in self.applied_reveals],
            "flips": [list(x) for x in self.flips],
            "added_edges": [list(x) for x in self.added_edges],
            "rewards": self.rewards,
        }

    @classmethod
    def from_json(cls, d: dict) -> "StepLog":
        return cls(
            t=d["t"],
            unfriends=[tuple(x) for x in d["unfriends"]],
            reveals=[tuple(x) for x in d["reveals"]],
            removed_edges=[tuple(x) for x in d["removed_edges"]],
            applied_reveals=[tuple(x) for x in d["applied_reveals"]],
            flips=[tuple(x) for x in d["flips"]],
            added_edges=[tuple(x) for x in d["added_edges"]],
            rewards=list(d["rewards"]),
        )


def step(state: SimState) -> tuple[SimState, StepLog]:
    t = state.t
    actions = phase_choose(state)
    unf = actions.of_kind(KIND_UNFRIEND)
    rev = actions.of_kind(KIND_REVEAL)
    removed, applied = phase_execute(state, actions)
    flips = phase_update(state)
    added = phase_grow(state)
    state.t += 1
    log = StepLog(
        t=t,
        unfriends=sorted((int(a), int(b)) for a, b, _ in unf.tolist()),
        reveals=sorted(tuple(int(x) for x in r) for r in rev.tolist()),
        removed_edges=removed,
        applied_reveals=applied,
        flips=flips,
        added_edges=added,
        rewards=state.rewards().tolist(),
    )
    return state, log


def apply_log(state: SimState, log: StepLog) -> SimState:
    """Replay a logged transition onto ``state`` without drawing any randomness."""
    if log.t != state.t:
        raise ValueError(f"log is for step {log.t}, state is at {state.t}")
    g, masks = state.graph, state.masks
    for i, j in log.unfriends:
        g.remove_edge(i, j)
        masks.clear(i, j)
    for i, j, k in sorted(log.reveals):
        masks.reveal(i, j, k, state.profile, g)
    for i, k, old, new in log.flips:
        if state.profile[i, k] != old:
            raise ValueError(f"log expects b[{i},{k}] == {old}")
        state.profile[i, k] = new
    masks.sync(state.profile)
    for i, j, w_ij, w_ji in log.added_edges:
        g.add_edge(i, j, w_ij, w_ji)
        masks.clear(i, j)
    state.t += 1
    return state


@dataclass
class SimResult:
    config: SimConfig
    archetypes: list[Archetype]
    frames: list[MetricFrame]
    trajectory: np.ndarray  # (steps + 1, n, K)
    logs: list[StepLog]
    final: SimState
    initial: SimState | None = None

    @property
    def density(self) -> np.ndarray:
        return np.array([f.density for f in self.frames])

    def flags(self, **kw) -> OutcomeFlags:
        return outcome_flags(self.frames, self.trajectory, **kw)

    def to_json(self) -> dict:
        g = self.final.graph
        return {
            "config": self.config.to_dict(),
            "archetypes": [a.value for a in self.archetypes],
            "frames": [f.to_json() for f in self.frames],
            "trajectory": self.trajectory.tolist(),
            "logs": [log.to_json() for log in self.logs],
            "final": {
                "t": self.final.t,
                "edges": [[i, j, float(g.weights[i, j]), float(g.weights[j, i])] for i, j in g.edges()],
                "profile": self.final.profile.tolist(),
                "masks": [[int(i), int(j), self.final.masks.m[i, j].tolist()]
                          for i, j in zip(*np.nonzero(self.final.masks.m.any(axis=2)))],
            },
        }


def measure(state: SimState) -> MetricFrame:
    return metric_frame(state.t, state.graph, state.profile, state.archetypes, state.rewards())


def run(config: SimConfig, policies: Mapping[Archetype, Policy] | None = None,
        check: bool = False) -> SimResult:
    """Initialize and run ``config.steps`` steps, measuring after each.

    ``check`` asserts the state invariants after every step (slow).
    """
    state = init(config, policies)
    initial = state.copy()
    frames = [measure(state)]
    trajectory = np.empty((config.steps + 1, config.nodes, config.K), dtype=np.int8)
    trajectory[0] = state.profile
    logs = []
    for t in range(config.steps):
        state, log = step(state)
        if check:
            state.check_invariants()
        logs.append(log)
        frames.append(measure(state))
        trajectory[t + 1] = state.profile
    return SimResult(config, state.archetypes, frames, trajectory, logs, state, initial)
