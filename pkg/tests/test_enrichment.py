import json
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxplan.enrichment import (
    BLOCK_END,
    correction_block,
    count_blocks,
    enrich_prompt,
    fired_rules,
    load_rules,
    match_rules,
)
from voxplan.errors import RuleLoadError
from voxplan.planner import SYSTEM_PROMPT

RULES = load_rules()
FIX = json.loads(resources.files("voxplan.data").joinpath("enrichment_fixtures.json").read_text())


def test_five_bundled_rules():
    assert [r.id for r in RULES] == [
        "in-front-of", "each-end-after-extend", "l-shape-extend", "chain-reference", "t-shape-extend",
    ]


@pytest.mark.parametrize("rule_id", list(FIX["positives"]))
def test_positive_fixture_fires_exactly_its_rule(rule_id):
    assert match_rules(FIX["positives"][rule_id], RULES) == [rule_id]


def test_control_corpus_is_silent():
    assert len(FIX["control"]) == 20
    for text in FIX["control"]:
        assert match_rules(text, RULES) == [], text


def test_double_fire():
    fired = match_rules(FIX["double_fire"]["instruction"], RULES)
    assert sorted(fired) == sorted(FIX["double_fire"]["rules"]) and len(fired) == 2


def test_prompt_gets_one_block_per_rule():
    fired = fired_rules("Put a yellow block in front of the red one.", RULES)
    prompt = enrich_prompt(SYSTEM_PROMPT, fired)
    assert prompt.startswith(SYSTEM_PROMPT)
    assert count_blocks(prompt) == 2 and prompt.count(BLOCK_END) == 2
    assert "### CORRECTION chain-reference ###" in prompt


def test_no_rules_leaves_prompt_untouched():
    assert enrich_prompt(SYSTEM_PROMPT, []) == SYSTEM_PROMPT


def test_case_insensitive():
    assert match_rules("IN FRONT OF the tower", RULES) == ["in-front-of"]


def test_custom_rules_from_text_and_empty_set():
    rules = load_rules('[{"id": "x", "trigger": "diagonal", "trigger_kind": "substring", '
                       '"correction": "no diagonals", "example": "-"}]')
    assert match_rules("build a diagonal", rules) == ["x"]
    assert load_rules("[]") == []
    assert "no diagonals" in correction_block(rules[0])


@pytest.mark.parametrize("text, fragment", [
    ("{", "JSON"),
    ('{"id": "x"}', "array"),
    ('[{"id": "x", "trigger": "(", "trigger_kind": "regex", "correction": "c", "example": "e"}]', "pattern"),
    ('[{"id": "x", "trigger": "a", "trigger_kind": "substring", "correction": "c", "example": "e"},'
     ' {"id": "x", "trigger": "b", "trigger_kind": "substring", "correction": "c", "example": "e"}]', "duplicate"),
])
def test_bad_rule_files(text, fragment):
    with pytest.raises(RuleLoadError, match=fragment):
        load_rules(text)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(list(FIX["positives"].values()) + FIX["control"]), max_size=4))
def test_firing_composes_over_sentences(sentences):
    text = " ".join(sentences)
    expected = set()
    for s in sentences:
        expected |= set(match_rules(s, RULES))
    # concatenation can only add matches (some triggers span sentences)
    assert expected <= set(match_rules(text, RULES))
    assert count_blocks(enrich_prompt(SYSTEM_PROMPT, fired_rules(text, RULES))) == len(match_rules(text, RULES))
