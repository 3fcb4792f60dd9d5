"""Simulation configuration and its JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .graph import GENERATORS, WeightInit
from .model import ARCHETYPES, Archetype
from .rng import MAX_SEED

MASK_INITS = ("all_visible", "all_hidden")
REQUIRED = ("nodes", "K", "type_dist", "saturation", "steps", "seed")


@dataclass(frozen=True)
class SimConfig:
    nodes: int
    K: int
    type_dist: tuple[float, float, float]  # (hom, het, adv)
    saturation: float
    steps: int
    seed: int
    upd_thresh: float = 0.0
    upd_prob: float = 0.25
    unf_thresh: float = 0.5
    unf_prob: float = 0.9
    friend_prob: float = 0.05
    generator: str = "small_world"
    mask_init: str = "all_visible"
    weight_init: WeightInit = field(default_factory=WeightInit)
    res_overrides: dict = field(default_factory=dict)
    upd_prob_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "type_dist", tuple(float(x) for x in self.type_dist))
        object.__setattr__(self, "res_overrides", _norm_overrides(self.res_overrides))
        object.__setattr__(self, "upd_prob_overrides", _norm_overrides(self.upd_prob_overrides))
        self.validate()

    def validate(self) -> None:
        p = {}
        if not _is_int(self.nodes) or self.nodes < 2:
            p["nodes"] = f"integer >= 2 required, got {self.nodes!r}"
        if not _is_int(self.K) or self.K < 1:
            p["K"] = f"integer >= 1 required, got {self.K!r}"
        if len(self.type_dist) != 3 or any(x < 0 for x in self.type_dist):
            p["type_dist"] = f"three non-negative proportions required, got {self.type_dist!r}"
        elif abs(sum(self.type_dist) - 1.0) > 1e-9:
            p["type_dist"] = f"proportions must sum to 1, got {sum(self.type_dist)!r}"
        if not _is_num(self.saturation) or not 0.0 < self.saturation <= 1.0:
            p["saturation"] = f"must be in (0, 1], got {self.saturation!r}"
        if not _is_int(self.steps) or self.steps < 0:
            p["steps"] = f"non-negative integer required, got {self.steps!r}"
        if not _is_int(self.seed) or not 0 <= self.seed <= MAX_SEED:
            p["seed"] = f"integer in [0, 2^64) required, got {self.seed!r}"
        if not _is_num(self.upd_thresh) or not 0.0 <= self.upd_thresh <= 0.5:
            p["upd_thresh"] = f"must be in [0, 0.5], got {self.upd_thresh!r}"
        for name in ("upd_prob", "unf_thresh", "unf_prob", "friend_prob"):
            v = getattr(self, name)
            if not _is_num(v) or not 0.0 <= v <= 1.0:
                p[name] = f"must be in [0, 1], got {v!r}"
        if self.generator not in GENERATORS:
            p["generator"] = f"must be one of {GENERATORS}, got {self.generator!r}"
        if self.mask_init not in MASK_INITS:
            p["mask_init"] = f"must be one of {MASK_INITS}, got {self.mask_init!r}"
        if not isinstance(self.weight_init, WeightInit):
            p["weight_init"] = f"expected WeightInit, got {self.weight_init!r}"
        for name, lo, hi in (("res_overrides", 0.0, 0.5), ("upd_prob_overrides", 0.0, 1.0)):
            for arch, v in getattr(self, name).items():
                if not _is_num(v) or not lo <= v <= hi:
                    p[name] = f"{arch}: {v!r} outside [{lo}, {hi}]"
        if p:
            raise ConfigError(p)

    def res_for(self, archetype: Archetype) -> float:
        return self.res_overrides.get(archetype.value, self.upd_thresh)

    def upd_prob_for(self, archetype: Archetype) -> float:
        return self.upd_prob_overrides.get(archetype.value, self.upd_prob)

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["type_dist"] = list(self.type_dist)
        d["weight_init"] = self.weight_init.to_json()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict) -> "SimConfig":
        if not isinstance(obj, dict):
            raise ConfigError({"<root>": "config must be a JSON object"})
        known = {f.name for f in fields(cls)}
        problems = {k: "unknown field" for k in obj if k not in known}
        problems.update({k: "missing required field" for k in REQUIRED if k not in obj})
        if problems:
            raise ConfigError(problems)
        kw = dict(obj)
        td = kw["type_dist"]
        if isinstance(td, dict):
            extra = set(td) - {a.value for a in ARCHETYPES}
            if extra:
                raise ConfigError({"type_dist": f"unknown archetypes {sorted(extra)}"})
            kw["type_dist"] = tuple(float(td.get(a.value, 0.0)) for a in ARCHETYPES)
        elif isinstance(td, (list, tuple)) and all(_is_num(x) for x in td):
            kw["type_dist"] = tuple(td)
        else:
            raise ConfigError({"type_dist": f"expected list or object of proportions, got {td!r}"})
        if "weight_init" in kw:
            kw["weight_init"] = WeightInit.from_json(kw["weight_init"])
        return cls(**kw)


def parse_config(path) -> SimConfig:
    """Load and validate a JSON config file, filling defaults for optional fields."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError({"<file>": f"{path}: invalid JSON ({e})"}) from None
    return SimConfig.from_dict(obj)


def _norm_overrides(d) -> dict:
    if not d:
        return {}
    if not isinstance(d, dict):
        raise ConfigError({"overrides": f"expected an object, got {d!r}"})
    out = {}
    for k, v in d.items():
        key = k.value if isinstance(k, Archetype) else str(k)
        if key not in {a.value for a in ARCHETYPES}:
            raise ConfigError({"overrides": f"unknown archetype {k!r}"})
        out[key] = v
    return dict(sorted(out.items()))


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)
