"""Opinions, masks, rewards, aggregation and the archetype update/policy rules.

Opinions are an ``(n, K)`` int8 array of +/-1. Masks are an ``(n, n, K)``
int8 array where ``m[i, j]`` is what i has revealed to j: 0 for hidden,
otherwise i's current opinion.

Most operations come in two forms: a per-agent function that mirrors the
textbook definition, and a vectorized ``*_all`` / ``*_profile`` variant the
engine uses. Tests check that the two agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .graph import SocialGraph, WeightInit  # noqa: F401  (re-exported)


class Archetype(str, Enum):
    HOM = "hom"
    HET = "het"
    ADV = "adv"

    @property
    def code(self) -> int:
        return _CODES[self]


ARCHETYPES = (Archetype.HOM, Archetype.HET, Archetype.ADV)
_CODES = {a: c for c, a in enumerate(ARCHETYPES)}

REVEAL = "reveal"
UNFRIEND = "unfriend"
NOP = "nop"
ALL_ACTIONS = frozenset({REVEAL, UNFRIEND, NOP})


@dataclass(frozen=True)
class AgentSpec:
    archetype: Archetype
    res: float = 0.0
    upd_prob: float = 0.25
    unf_prob: float = 0.9
    unf_thresh: float = 0.5
    actions: frozenset = field(default=ALL_ACTIONS)

    def __post_init__(self):
        if not 0.0 <= self.res <= 0.5:
            raise ValueError(f"res must be in [0, 0.5], got {self.res}")
        for name in ("upd_prob", "unf_prob", "unf_thresh"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if not set(self.actions) <= ALL_ACTIONS:
            raise ValueError(f"unknown actions {set(self.actions) - ALL_ACTIONS}")


@dataclass(frozen=True)
class Action:
    kind: str
    actor: int
    target: int
    topic: int = -1

    @classmethod
    def reveal(cls, i: int, j: int, k: int) -> "Action":
        return cls(REVEAL, i, j, k)

    @classmethod
    def unfriend(cls, i: int, j: int) -> "Action":
        return cls(UNFRIEND, i, j)

    @classmethod
    def nop(cls, i: int, j: int) -> "Action":
        return cls(NOP, i, j)


@dataclass(frozen=True)
class PairDistance:
    value: float | None
    n_revealed: int

    @property
    def defined(self) -> bool:
        return self.value is not None


def random_profile(n: int, K: int, rng: np.random.Generator) -> np.ndarray:
    return np.where(rng.random((n, K)) < 0.5, -1, 1).astype(np.int8)


class MaskStore:
    """Revelation vectors for every ordered pair."""

    def __init__(self, n: int, K: int):
        self.m = np.zeros((n, n, K), dtype=np.int8)

    @classmethod
    def visible(cls, graph: SocialGraph, profile: np.ndarray) -> "MaskStore":
        store = cls(graph.n, profile.shape[1])
        store.m[:] = np.where(graph.adj[:, :, None], profile[:, None, :], 0)
        return store

    def copy(self) -> "MaskStore":
        out = MaskStore.__new__(MaskStore)
        out.m = self.m.copy()
        return out

    def __eq__(self, other):
        return isinstance(other, MaskStore) and np.array_equal(self.m, other.m)

    def reveal(self, i: int, j: int, k: int, profile: np.ndarray, graph: SocialGraph) -> bool:
        """Set m_ijk = b_ik. Silently dropped (returns False) if {i, j} is not an edge."""
        if not graph.adj[i, j]:
            return False
        self.m[i, j, k] = profile[i, k]
        return True

    def clear(self, i: int, j: int) -> None:
        """Zero both directions, as happens on unfriending."""
        self.m[i, j] = 0
        self.m[j, i] = 0

    def sync(self, profile: np.ndarray) -> None:
        """Rewrite revealed entries to the revealer's current opinion."""
        np.copyto(self.m, np.where(self.m != 0, profile[:, None, :], 0).astype(np.int8))

    def check_invariants(self, graph: SocialGraph, profile: np.ndarray) -> None:
        m = self.m
        ok = (m == 0) | (m == profile[:, None, :])
        assert ok.all(), "revealed entry differs from the revealer's opinion"
        assert not m[~graph.adj].any(), "mask on a non-edge"


def reveal_mask(masks: MaskStore, i, j, k, profile, graph) -> MaskStore:
    masks.reveal(i, j, k, profile, graph)
    return masks


def clear_masks_on_unfriend(masks: MaskStore, i, j) -> MaskStore:
    masks.clear(i, j)
    return masks


# -- distance and reward ----------------------------------------------------

def distance(i: int, j: int, profile: np.ndarray, masks: MaskStore) -> PairDistance:
    """Fraction of the topics j has revealed to i on which they disagree."""
    seen = masks.m[j, i]
    revealed = seen != 0
    n = int(revealed.sum())
    if n == 0:
        return PairDistance(None, 0)
    disagree = int((seen[revealed] != profile[i, revealed]).sum())
    return PairDistance(disagree / n, n)


def distance_matrix(profile: np.ndarray, masks: MaskStore) -> tuple[np.ndarray, np.ndarray]:
    """All perceived distances. Returns ``(d, defined)``; ``d[i, j]`` is i's view of j
    and is 0 wherever ``defined`` is False."""
    seen = masks.m.transpose(1, 0, 2)  # seen[i, j] = m_ji
    revealed = seen != 0
    n_rev = revealed.sum(axis=2)
    disagree = (revealed & (seen != profile[:, None, :])).sum(axis=2)
    defined = n_rev > 0
    d = disagree / np.maximum(n_rev, 1)
    return d, defined


def pair_reward(archetype, d):
    """Reward from a neighbor at distance ``d``. ``archetype`` may be an
    Archetype or an array of archetype codes broadcastable against ``d``."""
    if isinstance(archetype, Archetype):
        if archetype is Archetype.HOM:
            return 1.0 - d
        if archetype is Archetype.ADV:
            return d
        return 1.0 - 2.0 * np.abs(d - 0.5) if isinstance(d, np.ndarray) else 1.0 - 2.0 * abs(d - 0.5)
    codes = np.asarray(archetype)
    d = np.asarray(d, dtype=float)
    return np.select(
        [codes == 0, codes == 1],
        [1.0 - d, 1.0 - 2.0 * np.abs(d - 0.5)],
        default=d,
    )


def neighborhood_reward(i: int, graph: SocialGraph, profile: np.ndarray,
                        masks: MaskStore, archetype: Archetype) -> float:
    """Mean pair reward over neighbors that have revealed something; 0 if none."""
    rewards = []
    for j in graph.neighbors(i):
        d = distance(i, int(j), profile, masks)
        if d.defined:
            rewards.append(pair_reward(archetype, d.value))
    return float(np.mean(rewards)) if rewards else 0.0


def neighborhood_rewards(graph: SocialGraph, profile: np.ndarray, masks: MaskStore,
                         codes: np.ndarray) -> np.ndarray:
    d, defined = distance_matrix(profile, masks)
    use = defined & graph.adj
    r = pair_reward(codes[:, None], d)
    count = use.sum(axis=1)
    total = np.where(use, r, 0.0).sum(axis=1)
    return np.where(count > 0, total / np.maximum(count, 1), 0.0)


# -- aggregation ------------------------------------------------------------

def aggregate_opinion(i: int, graph: SocialGraph, profile: np.ndarray,
                      masks: MaskStore, self_weight: float = 1.0) -> np.ndarray:
    """Influence-weighted mean of what i sees, over i and its neighbors.

    Hidden entries count as 0 but the neighbor's weight stays in the
    denominator, so hiding pulls the aggregate toward neutral.
    """
    nbrs = graph.neighbors(i)
    w = graph.weights[nbrs, i]
    total = self_weight + w.sum()
    if total <= 0:
        return np.zeros(profile.shape[1])
    num = self_weight * profile[i].astype(float) + w @ masks.m[nbrs, i].astype(float)
    return num / total


def aggregate_profile(graph: SocialGraph, profile: np.ndarray, masks: MaskStore,
                      self_weights: np.ndarray) -> np.ndarray:
    """``aggregate_opinion`` for every node at once, shape ``(n, K)``."""
    num = self_weights[:, None] * profile + np.einsum("ji,jik->ik", graph.weights, masks.m)
    den = self_weights + graph.weights.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = num / den[:, None]
    out[den <= 0] = 0.0
    return out


# -- update rule ------------------------------------------------------------

def update_opinion(archetype: Archetype, b: int, agg: float, res: float,
                   upd_prob: float, u: float) -> int:
    """New value of one opinion. ``u`` is a U[0, 1) draw deciding the flip.

    HOM and HET move toward a neighborhood that opposes them; ADV moves away
    from one that agrees. Either way the aggregate must exceed ``res`` in
    magnitude before a flip is considered.
    """
    pressure = agg * b
    triggered = pressure > 0 if archetype is Archetype.ADV else pressure < 0
    if triggered and abs(agg) > res and u < upd_prob:
        return -b
    return b


def flip_mask(codes: np.ndarray, profile: np.ndarray, agg: np.ndarray, res: np.ndarray,
              upd_prob: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Boolean ``(n, K)``: which opinions flip this step."""
    pressure = agg * profile
    adv = (codes == Archetype.ADV.code)[:, None]
    triggered = np.where(adv, pressure > 0, pressure < 0)
    return triggered & (np.abs(agg) > res[:, None]) & (u < upd_prob[:, None])


# -- default policy ---------------------------------------------------------

def default_policy(i: int, graph: SocialGraph, profile: np.ndarray, masks: MaskStore,
                   agent: AgentSpec, draws: np.ndarray) -> list[Action]:
    """One action per neighbor, neighbors in ascending order.

    ``draws`` is i's ``(3, n)`` block of U[0, 1) values; column j holds the
    unfriend coin, the reveal coin and the topic pick for neighbor j.

    A neighbor whose revealed opinions make it unrewarding is unfriended with
    ``unf_prob``. Otherwise, if some topic is still hidden from it, one
    hidden topic is revealed with probability 1/2.
    """
    actions = []
    hidden_all = masks.m[i] == 0
    for j in graph.neighbors(i).tolist():
        d = distance(i, j, profile, masks)
        if (
            UNFRIEND in agent.actions
            and d.defined
            and pair_reward(agent.archetype, d.value) < agent.unf_thresh
            and draws[0, j] < agent.unf_prob
        ):
            actions.append(Action.unfriend(i, j))
            continue
        hidden = np.flatnonzero(hidden_all[j])
        if REVEAL in agent.actions and hidden.size and draws[1, j] < 0.5:
            k = hidden[int(draws[2, j] * hidden.size)]
            actions.append(Action.reveal(i, j, int(k)))
            continue
        actions.append(Action.nop(i, j))
    return actions


KIND_NOP, KIND_REVEAL, KIND_UNFRIEND = 0, 1, 2
KIND_NAMES = {KIND_NOP: NOP, KIND_REVEAL: REVEAL, KIND_UNFRIEND: UNFRIEND}
KIND_CODES = {v: k for k, v in KIND_NAMES.items()}


def default_policy_all(graph: SocialGraph, profile: np.ndarray, masks: MaskStore,
                       codes: np.ndarray, unf_thresh: np.ndarray, unf_prob: np.ndarray,
                       can_unfriend: np.ndarray, can_reveal: np.ndarray,
                       draws: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``default_policy`` for every agent.

    ``draws`` has shape ``(3, n, n)``; ``draws[:, i]`` is agent i's block.
    Returns ``(kind, topic)`` matrices indexed ``[actor, target]``; entries
    off the edge set are meaningless.
    """
    adj = graph.adj
    d, defined = distance_matrix(profile, masks)
    r = pair_reward(codes[:, None], d)
    unf = (adj & defined & (r < unf_thresh[:, None]) & (draws[0] < unf_prob[:, None])
           & can_unfriend[:, None])
    hidden = masks.m == 0
    n_hidden = hidden.sum(axis=2)
    rev = adj & ~unf & (n_hidden > 0) & (draws[1] < 0.5) & can_reveal[:, None]
    pick = np.floor(draws[2] * n_hidden).astype(np.int64)
    topic = np.argmax(np.cumsum(hidden, axis=2) > pick[:, :, None], axis=2)
    kind = np.full(adj.shape, KIND_NOP, dtype=np.int8)
    kind[rev] = KIND_REVEAL
    kind[unf] = KIND_UNFRIEND
    return kind, np.where(rev, topic, -1)
