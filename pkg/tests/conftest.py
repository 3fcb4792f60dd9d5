import numpy as np
import pytest

from opinionnet.config import SimConfig
from opinionnet.engine import SimState
from opinionnet.graph import SocialGraph
from opinionnet.model import ALL_ACTIONS, AgentSpec, Archetype, MaskStore

# criterion id -> (title, detail); filled by test_acceptance, outcome added by the report hook
ACCEPTANCE: dict[str, dict] = {}


def make_state(graph, profile, archetypes, masks=None, *, res=0.0, upd_prob=1.0, unf_prob=0.9,
               unf_thresh=0.5, friend_prob=0.0, seed=0, actions=ALL_ACTIONS, t=0):
    """Hand-built state; masks default to everything visible."""
    profile = np.asarray(profile, dtype=np.int8)
    n, K = profile.shape
    if isinstance(archetypes, Archetype):
        archetypes = [archetypes] * n
    if masks is None:
        masks = MaskStore.visible(graph, profile)
    cfg = SimConfig(nodes=max(n, 2), K=K, type_dist=(1, 0, 0), saturation=0.5, steps=1, seed=seed,
                    friend_prob=friend_prob)
    agents = [AgentSpec(a, res=res, upd_prob=upd_prob, unf_prob=unf_prob, unf_thresh=unf_thresh,
                        actions=actions) for a in archetypes]
    return SimState(t, graph, profile, masks, np.ones(n), agents, cfg)


def path_graph(n):
    return SocialGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n):
    return SocialGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves):
    return SocialGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and rep.when == "call":
        entry = ACCEPTANCE.setdefault(marker.args[0], {"detail": ""})
        entry["title"] = marker.args[1]
        entry["passed"] = rep.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c.split(".")[0])):
        e = ACCEPTANCE[cid]
        status = "PASS" if e.get("passed") else "FAIL"
        tr.write_line(f"{status}  criterion {cid}: {e['title']}  [{e['detail']}]")
