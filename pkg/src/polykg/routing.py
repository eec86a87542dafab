"""Rule-based backend selection.

A policy is an ordered rule list; the first rule whose ``match`` accepts the
label wins, and the last rule must be a catch-all.  Policies round-trip
through a small JSON config format::

    {
      "slots": {"doc-store": {"name": "MongoDB", "language": "pipeline"}, ...},
      "rules": [
        {"id": "R1",
         "match": {"shape": ["single-triple-pattern", "subject-subject"],
                   "has_modifiers": false, "has_optional": false},
         "targets": ["doc-store", "exhaustive-index-store"]},
        ...
      ],
      "endpoints": {"columnar-store": "http://localhost:8890/sparql"}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .errors import PolicyError
from .shape import QueryLabel, Shape

DOC_STORE = "doc-store"
EXHAUSTIVE_INDEX_STORE = "exhaustive-index-store"
BTREE_STORE = "btree-store"
COLUMNAR_STORE = "columnar-store"

_FLAGS = ("has_modifiers", "has_optional", "has_filter")


@dataclass(frozen=True)
class BackendSlot:
    slot_id: str
    display_name: str
    language: str = "sparql"  # "sparql" or "pipeline"

    def __post_init__(self):
        if self.language not in ("sparql", "pipeline"):
            raise PolicyError(f"slot {self.slot_id}: unknown language {self.language!r}")

    @property
    def requires_translation(self) -> bool:
        return self.language == "pipeline"


DEFAULT_SLOTS = (
    BackendSlot(DOC_STORE, "MongoDB", "pipeline"),
    BackendSlot(EXHAUSTIVE_INDEX_STORE, "RDF-3X"),
    BackendSlot(BTREE_STORE, "Blazegraph"),
    BackendSlot(COLUMNAR_STORE, "Virtuoso"),
)


@dataclass(frozen=True)
class Rule:
    rule_id: str
    targets: tuple[str, ...]
    shapes: Optional[frozenset[Shape]] = None
    flags: tuple[tuple[str, bool], ...] = ()

    @property
    def catch_all(self) -> bool:
        return self.shapes is None and not self.flags

    def matches(self, label: QueryLabel) -> bool:
        if self.shapes is not None and label.shape not in self.shapes:
            return False
        return all(getattr(label, name) == want for name, want in self.flags)


@dataclass(frozen=True)
class RoutingDecision:
    targets: tuple[BackendSlot, ...]
    rationale: str

    @property
    def requires_translation(self) -> tuple[bool, ...]:
        return tuple(slot.requires_translation for slot in self.targets)

    @property
    def slot_ids(self) -> tuple[str, ...]:
        return tuple(slot.slot_id for slot in self.targets)

    def describe(self) -> str:
        return f"route=[{', '.join(self.slot_ids)}] ({self.rationale})"


@dataclass(frozen=True)
class RoutingPolicy:
    slots: tuple[BackendSlot, ...]
    rules: tuple[Rule, ...]
    endpoints: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        ids = [s.slot_id for s in self.slots]
        if len(set(ids)) != len(ids):
            raise PolicyError(f"duplicate slot ids in {ids}")
        if not self.rules or not self.rules[-1].catch_all:
            raise PolicyError("the last rule must be a catch-all (empty match)")
        for rule in self.rules:
            if not rule.targets:
                raise PolicyError(f"rule {rule.rule_id} has no targets")
            unknown = [t for t in rule.targets if t not in ids]
            if unknown:
                raise PolicyError(f"rule {rule.rule_id} targets unknown slots {unknown}")
        unknown = [slot for slot in self.endpoints if slot not in ids]
        if unknown:
            raise PolicyError(f"endpoints configured for unknown slots {unknown}")

    def slot(self, slot_id: str) -> BackendSlot:
        for s in self.slots:
            if s.slot_id == slot_id:
                return s
        raise KeyError(slot_id)

    @property
    def slot_ids(self) -> tuple[str, ...]:
        return tuple(s.slot_id for s in self.slots)


def default_policy() -> RoutingPolicy:
    return RoutingPolicy(
        slots=DEFAULT_SLOTS,
        rules=(
            Rule(
                "R1",
                (DOC_STORE, EXHAUSTIVE_INDEX_STORE),
                frozenset({Shape.SINGLE, Shape.SUBJECT_SUBJECT}),
                (("has_modifiers", False), ("has_optional", False)),
            ),
            Rule("R2", (BTREE_STORE,), frozenset({Shape.SUBJECT_OBJECT})),
            Rule("R3", (COLUMNAR_STORE,)),
        ),
    )


def select_backends(label: QueryLabel, policy: Optional[RoutingPolicy] = None) -> RoutingDecision:
    policy = policy or default_policy()
    for rule in policy.rules:
        if rule.matches(label):
            return RoutingDecision(tuple(policy.slot(t) for t in rule.targets), rule.rule_id)
    raise AssertionError("catch-all rule did not match")  # guarded by RoutingPolicy


# -- config file format -------------------------------------------------------


def policy_to_dict(policy: RoutingPolicy) -> dict[str, Any]:
    rules = []
    for rule in policy.rules:
        match: dict[str, Any] = {}
        if rule.shapes is not None:
            shapes = sorted(s.value for s in rule.shapes)
            match["shape"] = shapes[0] if len(shapes) == 1 else shapes
        for name, want in rule.flags:
            match[name] = want
        rules.append({"id": rule.rule_id, "match": match, "targets": list(rule.targets)})
    out: dict[str, Any] = {
        "slots": {s.slot_id: {"name": s.display_name, "language": s.language} for s in policy.slots},
        "rules": rules,
    }
    if policy.endpoints:
        out["endpoints"] = dict(policy.endpoints)
    return out


def policy_from_dict(data: Mapping[str, Any]) -> RoutingPolicy:
    try:
        slots = []
        for slot_id, spec in data.get("slots", {}).items():
            if isinstance(spec, str):
                spec = {"name": spec}
            slots.append(BackendSlot(slot_id, spec.get("name", slot_id), spec.get("language", "sparql")))
        if not slots:
            slots = list(DEFAULT_SLOTS)
        rules = []
        for i, raw in enumerate(data["rules"]):
            match = dict(raw.get("match", {}))
            shapes = None
            if "shape" in match:
                wanted = match.pop("shape")
                wanted = [wanted] if isinstance(wanted, str) else list(wanted)
                shapes = frozenset(Shape(w) for w in wanted)
            flags = []
            for name in _FLAGS:
                if name in match:
                    value = match.pop(name)
                    if not isinstance(value, bool):
                        raise PolicyError(f"rule {i}: {name} must be true or false")
                    flags.append((name, value))
            if match:
                raise PolicyError(f"rule {i}: unknown match keys {sorted(match)}")
            rules.append(Rule(str(raw.get("id", f"rule{i + 1}")), tuple(raw["targets"]), shapes, tuple(flags)))
        return RoutingPolicy(tuple(slots), tuple(rules), dict(data.get("endpoints", {})))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PolicyError):
            raise
        raise PolicyError(f"invalid policy config: {exc}") from exc


def dump_policy(policy: RoutingPolicy) -> str:
    return json.dumps(policy_to_dict(policy), indent=2) + "\n"


def load_policy(source: Union[str, Path]) -> RoutingPolicy:
    """Load a policy from a JSON file path or JSON text."""
    if isinstance(source, Path) or not source.lstrip().startswith("{"):
        source = Path(source).read_text(encoding="utf-8")
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise PolicyError(f"policy config is not valid JSON: {exc}") from exc
    return policy_from_dict(data)
