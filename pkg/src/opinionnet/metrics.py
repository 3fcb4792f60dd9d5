"""Per-step measurements and outcome detectors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graph import SocialGraph
from .model import ARCHETYPES, Archetype

BETWEENNESS_NORMALIZATION = "(n-1)(n-2)/2 over the whole graph, unweighted topology"


def betweenness(g: SocialGraph) -> np.ndarray:
    """Normalized shortest-path betweenness of every node.

    Brandes' accumulation run for all sources at once: a level-synchronous
    BFS fills path counts for every (source, node) pair, then dependencies
    are swept back level by level. Row ``s`` of each matrix is the state of
    the single-source pass from ``s``.
    """
    n = g.n
    if n < 3:
        return np.zeros(n)
    a = g.adj.astype(float)
    sigma = np.eye(n)
    seen = np.eye(n, dtype=bool)
    levels = [seen.copy()]
    frontier = seen.copy()
    while True:
        reach = np.where(frontier, sigma, 0.0) @ a
        new = (reach > 0) & ~seen
        if not new.any():
            break
        sigma[new] = reach[new]
        seen |= new
        levels.append(new)
        frontier = new
    delta = np.zeros((n, n))
    for lvl in range(len(levels) - 2, 0, -1):
        coef = np.where(levels[lvl + 1], (1.0 + delta) / np.where(sigma > 0, sigma, 1.0), 0.0)
        here = levels[lvl]
        delta[here] = (sigma * (coef @ a))[here]
    return delta.sum(axis=0) / ((n - 1) * (n - 2))


def component_labels(g: SocialGraph) -> tuple[int, np.ndarray]:
    return connected_components(g.adj, directed=False)


def components(g: SocialGraph) -> list[int]:
    """Connected component sizes, largest first."""
    _, labels = component_labels(g)
    return sorted(np.bincount(labels).tolist(), reverse=True)


def component_members(g: SocialGraph, labels: np.ndarray | None = None) -> list[np.ndarray]:
    """Members of each component, ordered by size (desc) then smallest member."""
    if labels is None:
        _, labels = component_labels(g)
    order = np.argsort(labels, kind="stable")
    cuts = np.flatnonzero(np.diff(labels[order])) + 1
    groups = np.split(order, cuts)
    return sorted(groups, key=lambda m: (-m.size, int(m[0])))


def graph_density(g: SocialGraph) -> float:
    if g.n < 2:
        return 0.0
    return 2.0 * g.num_edges() / (g.n * (g.n - 1))


def induced_density(g: SocialGraph, members) -> float:
    members = np.asarray(members)
    s = members.size
    if s < 2:
        return 0.0
    return float(g.adj[np.ix_(members, members)].sum()) / (s * (s - 1))


@dataclass(frozen=True)
class Camp:
    opinion: tuple[int, ...]
    size: int
    density: float
    core: bool = False


def opinion_codes(profile: np.ndarray) -> np.ndarray:
    """One integer per row, equal iff the opinion vectors are equal."""
    K = profile.shape[1]
    if K <= 62:
        return (profile > 0).astype(np.int64) @ (1 << np.arange(K, dtype=np.int64))
    return np.unique(profile, axis=0, return_inverse=True)[1].ravel()


def camps(g: SocialGraph, profile: np.ndarray, labels: np.ndarray | None = None) -> list[list[Camp]]:
    """Opinion camps inside each component (same order as ``component_members``).

    When a component holds exactly two camps, the one with strictly higher
    induced density is flagged as the core.
    """
    codes = opinion_codes(profile)
    out = []
    for members in component_members(g, labels):
        group = []
        for code in np.unique(codes[members]):
            sub = members[codes[members] == code]
            group.append(Camp(tuple(int(x) for x in profile[sub[0]]), int(sub.size), induced_density(g, sub)))
        group.sort(key=lambda c: (-c.size, c.opinion))
        if len(group) == 2 and group[0].density != group[1].density:
            hi = 0 if group[0].density > group[1].density else 1
            group[hi] = Camp(group[hi].opinion, group[hi].size, group[hi].density, core=True)
        out.append(group)
    return out


def distinct_opinions(profile: np.ndarray) -> int:
    return int(np.unique(opinion_codes(profile)).size)


def per_type_series(values, types) -> dict[Archetype, tuple[float, float]]:
    """Population mean and standard deviation of ``values`` per archetype."""
    values = np.asarray(values, dtype=float)
    types = list(types)
    out = {}
    for a in ARCHETYPES:
        idx = [i for i, t in enumerate(types) if t == a]
        if idx:
            v = values[idx]
            # equal values would otherwise give a rounding-noise stddev
            out[a] = (float(v.mean()), float(v.std()) if np.ptp(v) > 0 else 0.0)
    return out


@dataclass
class MetricFrame:
    t: int
    density: float
    component_sizes: list[int]
    isolate_count: int
    betweenness: np.ndarray
    per_type_betweenness: dict
    per_type_reward: dict
    distinct_opinions: int
    camps: list[list[Camp]] = field(repr=False)

    def csv_row(self) -> list:
        row = [
            self.t,
            self.density,
            len(self.component_sizes),
            self.component_sizes[0] if self.component_sizes else 0,
            self.isolate_count,
            self.distinct_opinions,
        ]
        for a in ARCHETYPES:
            btw = self.per_type_betweenness.get(a, ("", ""))
            rew = self.per_type_reward.get(a, ("", ""))
            row += [btw[0], btw[1], rew[0], rew[1]]
        return row

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "density": self.density,
            "component_sizes": self.component_sizes,
            "isolate_count": self.isolate_count,
            "betweenness": self.betweenness.tolist(),
            "per_type_betweenness": {a.value: list(v) for a, v in self.per_type_betweenness.items()},
            "per_type_reward": {a.value: list(v) for a, v in self.per_type_reward.items()},
            "distinct_opinions": self.distinct_opinions,
            "camps": [[[list(c.opinion), c.size, c.density, c.core] for c in comp] for comp in self.camps],
        }


CSV_HEADER = ["t", "density", "n_components", "largest_component", "isolates", "distinct_opinions"] + [
    f"{stat}_{a.value}"
    for a in ARCHETYPES
    for stat in ("btw_mean", "btw_std", "reward_mean", "reward_std")
]


def metric_frame(t: int, g: SocialGraph, profile: np.ndarray, types, rewards) -> MetricFrame:
    _, labels = component_labels(g)
    sizes = sorted(np.bincount(labels).tolist(), reverse=True)
    btw = betweenness(g)
    return MetricFrame(
        t=t,
        density=graph_density(g),
        component_sizes=sizes,
        isolate_count=sum(1 for s in sizes if s == 1),
        betweenness=btw,
        per_type_betweenness=per_type_series(btw, types),
        per_type_reward=per_type_series(rewards, types),
        distinct_opinions=distinct_opinions(profile),
        camps=camps(g, profile, labels),
    )


# -- outcome detectors --------------------------------------------------------

def detect_oscillation(trajectory, window: int) -> bool:
    """True iff the last ``window`` profiles repeat with period 2 and are not constant."""
    if window < 4:
        raise ValueError(f"window must be >= 4, got {window}")
    if len(trajectory) < window:
        raise ValueError(f"trajectory of length {len(trajectory)} shorter than window {window}")
    tail = np.asarray(trajectory[len(trajectory) - window:])
    if not all(np.array_equal(tail[t], tail[t + 2]) for t in range(window - 2)):
        return False
    return any(not np.array_equal(tail[t], tail[t + 1]) for t in range(window - 1))


def detect_plateau(series, window: int = 20, eps: float = 0.01) -> bool:
    """True iff the last ``window`` values span at most ``eps``.

    A slack of 1e-12 absorbs rounding in the subtraction, so a series
    spanning exactly ``eps`` counts as flat.
    """
    if len(series) < window or window < 1:
        return False
    tail = np.asarray(series[len(series) - window:], dtype=float)
    return bool(tail.max() - tail.min() <= eps + 1e-12)


@dataclass(frozen=True)
class OutcomeFlags:
    consensus_per_component: tuple[bool, ...]
    oscillation_period2: bool
    density_plateaued: bool

    @property
    def all_consensus(self) -> bool:
        return all(self.consensus_per_component)

    def to_json(self) -> dict:
        return {
            "consensus_per_component": list(self.consensus_per_component),
            "all_consensus": self.all_consensus,
            "oscillation_period2": self.oscillation_period2,
            "density_plateaued": self.density_plateaued,
        }


def outcome_flags(frames: list[MetricFrame], trajectory, oscillation_window: int = 10,
                  plateau_window: int = 20, plateau_eps: float = 0.01) -> OutcomeFlags:
    last = frames[-1]
    consensus = tuple(len(comp) == 1 for comp in last.camps)
    osc = len(trajectory) >= oscillation_window and detect_oscillation(trajectory, oscillation_window)
    plateau = detect_plateau([f.density for f in frames], plateau_window, plateau_eps)
    return OutcomeFlags(consensus, bool(osc), plateau)
