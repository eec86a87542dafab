from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from polykg import data
from polykg.errors import PolicyError
from polykg.routing import (
    BTREE_STORE,
    COLUMNAR_STORE,
    DOC_STORE,
    EXHAUSTIVE_INDEX_STORE,
    default_policy,
    dump_policy,
    load_policy,
    policy_from_dict,
    policy_to_dict,
    select_backends,
)
from polykg.shape import QueryLabel, Shape

labels = st.builds(QueryLabel, st.sampled_from(list(Shape)), st.booleans(), st.booleans(), st.booleans())


def test_default_slots():
    policy = default_policy()
    assert policy.slot_ids == (DOC_STORE, EXHAUSTIVE_INDEX_STORE, BTREE_STORE, COLUMNAR_STORE)
    assert [s.requires_translation for s in policy.slots] == [True, False, False, False]


def test_filter_alone_does_not_block_r1():
    decision = select_backends(QueryLabel(Shape.SINGLE, has_filter=True))
    assert decision.rationale == "R1"
    assert decision.describe() == "route=[doc-store, exhaustive-index-store] (R1)"


@given(labels)
def test_every_label_gets_a_nonempty_route(label):
    decision = select_backends(label)
    assert decision.targets
    assert decision.rationale in ("R1", "R2", "R3")


def test_bundled_policy_matches_default():
    assert load_policy(data.path(data.DEFAULT_POLICY)) == default_policy()


def test_json_round_trip():
    policy = default_policy()
    assert load_policy(dump_policy(policy)) == policy
    assert policy_from_dict(json.loads(json.dumps(policy_to_dict(policy)))) == policy


def test_custom_policy_changes_routing():
    policy = load_policy(json.dumps({
        "rules": [
            {"id": "all-so", "match": {"shape": "subject-object", "has_optional": False}, "targets": ["doc-store"]},
            {"id": "rest", "targets": ["exhaustive-index-store"]},
        ],
        "endpoints": {"btree-store": "http://localhost:9999/sparql"},
    }))
    assert select_backends(QueryLabel(Shape.SUBJECT_OBJECT), policy).rationale == "all-so"
    assert select_backends(QueryLabel(Shape.SUBJECT_OBJECT, has_optional=True), policy).rationale == "rest"
    assert policy.endpoints == {"btree-store": "http://localhost:9999/sparql"}


@pytest.mark.parametrize(
    "config",
    [
        {"rules": [{"id": "a", "match": {"shape": "subject-star"}, "targets": ["doc-store"]}]},
        {"rules": [{"targets": ["nowhere"]}]},
        {"rules": [{"targets": []}]},
        {"rules": [{"match": {"colour": "red"}, "targets": ["doc-store"]}, {"targets": ["doc-store"]}]},
        {"rules": [{"match": {"has_optional": "no"}, "targets": ["doc-store"]}, {"targets": ["doc-store"]}]},
        {"rules": [{"targets": ["doc-store"]}], "endpoints": {"mystery": "http://x"}},
        {"slots": {"a": "A", "b": "B"}, "rules": [{"targets": ["doc-store"]}]},
        {},
    ],
)
def test_invalid_policies(config):
    with pytest.raises(PolicyError):
        policy_from_dict(config)


def test_invalid_json():
    with pytest.raises(PolicyError):
        load_policy("{not json")
