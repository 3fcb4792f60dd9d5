"""Slow reference implementations used to cross-check the fast paths.

Nothing here touches numpy matrix algebra on the graph; every oracle walks
plain Python sets and lists so that it fails differently from the code it
checks.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .graph import SocialGraph, triadic_candidates
from .metrics import betweenness
from .model import MaskStore, aggregate_opinion, aggregate_profile


def adjacency_sets(g: SocialGraph) -> list[set[int]]:
    return [set(int(j) for j in range(g.n) if g.adj[i, j]) for i in range(g.n)]


def all_shortest_paths(nbrs: list[set[int]], s: int, t: int) -> list[list[int]]:
    """Every shortest s-t path, listed explicitly."""
    dist = {s: 0}
    queue = [s]
    for u in queue:
        for v in nbrs[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    if t not in dist:
        return []
    out = []

    def walk(path):
        u = path[-1]
        if u == t:
            out.append(list(path))
            return
        for v in sorted(nbrs[u]):
            if dist.get(v) == dist[u] + 1 and dist[v] <= dist[t]:
                path.append(v)
                walk(path)
                path.pop()

    walk([s])
    return out


def brute_betweenness(g: SocialGraph) -> list[float]:
    n = g.n
    nbrs = adjacency_sets(g)
    score = [0.0] * n
    for s, t in combinations(range(n), 2):
        paths = all_shortest_paths(nbrs, s, t)
        if not paths:
            continue
        for v in range(n):
            if v in (s, t):
                continue
            through = sum(1 for p in paths if v in p)
            score[v] += through / len(paths)
    if n < 3:
        return [0.0] * n
    norm = (n - 1) * (n - 2) / 2
    return [x / norm for x in score]


def brute_aggregate(i: int, g: SocialGraph, profile, masks: MaskStore, self_weight: float = 1.0) -> list[float]:
    K = profile.shape[1]
    terms = [(self_weight, [float(profile[i][k]) for k in range(K)])]
    for j in range(g.n):
        if j != i and g.adj[j][i]:
            terms.append((float(g.weights[j][i]), [float(masks.m[j][i][k]) for k in range(K)]))
    total = sum(w for w, _ in terms)
    if total <= 0:
        return [0.0] * K
    return [sum(w * v[k] for w, v in terms) / total for k in range(K)]


def brute_triadic(g: SocialGraph) -> set[tuple[int, int]]:
    nbrs = adjacency_sets(g)
    return {(i, j) for i, j in combinations(range(g.n), 2) if j not in nbrs[i] and nbrs[i] & nbrs[j]}


def random_graph(n: int, p: float, rng: np.random.Generator) -> SocialGraph:
    g = SocialGraph(n)
    for i, j in combinations(range(n), 2):
        if rng.random() < p:
            g.add_edge(i, j, float(rng.random()), float(rng.random()))
    return g


def random_instance(rng: np.random.Generator, max_n: int = 10, max_k: int = 5):
    """Random graph, opinions and valid masks with random weights."""
    n = int(rng.integers(1, max_n + 1))
    K = int(rng.integers(1, max_k + 1))
    g = random_graph(n, float(rng.random()), rng)
    profile = np.where(rng.random((n, K)) < 0.5, -1, 1).astype(np.int8)
    masks = MaskStore(n, K)
    show = rng.random((n, n, K)) < 0.6
    masks.m[:] = np.where(show & g.adj[:, :, None], profile[:, None, :], 0)
    return g, profile, masks


def check_betweenness(trials: int = 100, max_n: int = 12, seed: int = 0, tol: float = 1e-9):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        g = random_graph(int(rng.integers(1, max_n + 1)), float(rng.random()), rng)
        worst = max(worst, float(np.max(np.abs(betweenness(g) - brute_betweenness(g)), initial=0.0)))
    return worst <= tol, worst


def check_aggregate(trials: int = 1000, max_n: int = 10, seed: int = 0, tol: float = 1e-12):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        g, profile, masks = random_instance(rng, max_n)
        sw = np.ones(g.n)
        fast = aggregate_profile(g, profile, masks, sw)
        for i in range(g.n):
            ref = np.array(brute_aggregate(i, g, profile, masks))
            worst = max(worst, float(np.max(np.abs(fast[i] - ref))),
                        float(np.max(np.abs(aggregate_opinion(i, g, profile, masks) - ref))))
    return worst <= tol, worst


def check_triadic(trials: int = 300, max_n: int = 8, seed: int = 0):
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(trials):
        g = random_graph(int(rng.integers(1, max_n + 1)), float(rng.random()), rng)
        mismatches += triadic_candidates(g) != brute_triadic(g)
    return mismatches == 0, mismatches


def run_all(seed: int = 0) -> list[tuple[str, bool, str]]:
    ok_b, worst_b = check_betweenness(seed=seed)
    ok_a, worst_a = check_aggregate(seed=seed)
    ok_t, bad_t = check_triadic(seed=seed)
    return [
        ("betweenness vs path enumeration (100 graphs, n<=12)", ok_b, f"max abs error {worst_b:.3g}"),
        ("aggregate vs weighted mean (1000 instances, n<=10)", ok_a, f"max abs error {worst_a:.3g}"),
        ("triadic candidates vs pair scan (300 graphs, n<=8)", ok_t, f"{bad_t} mismatches"),
    ]
