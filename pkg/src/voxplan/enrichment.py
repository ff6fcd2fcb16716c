"""Pattern-triggered prompt corrections applied before the planner call."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import RuleLoadError

BLOCK_START = "### CORRECTION {id} ###"
BLOCK_END = "### END CORRECTION ###"
SENTINEL = "### CORRECTION "


@dataclass(frozen=True)
class EnrichmentRule:
    id: str
    trigger: str
    trigger_kind: str
    correction: str
    example: str

    def __post_init__(self):
        flags = re.IGNORECASE
        pattern = re.escape(self.trigger) if self.trigger_kind == "substring" else self.trigger
        object.__setattr__(self, "_regex", re.compile(pattern, flags))

    def matches(self, instruction: str) -> bool:
        return self._regex.search(instruction) is not None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "trigger": self.trigger,
            "trigger_kind": self.trigger_kind,
            "correction": self.correction,
            "example": self.example,
        }


def load_rules(source=None) -> list[EnrichmentRule]:
    """Load a rule set from a path, JSON text, or already-decoded list.

    With no argument the bundled rule file is used.
    """
    if source is None:
        doc = json.loads(resources.files("voxplan.data").joinpath("rules.json").read_text())
    elif isinstance(source, Path):
        doc = _decode(source.read_text(), str(source))
    elif isinstance(source, str):
        doc = _decode(source, "<text>") if source.strip() else []
    else:
        doc = source
    if not isinstance(doc, list):
        raise RuleLoadError("rule document must be a JSON array")
    rules, seen = [], set()
    for i, raw in enumerate(doc):
        if not isinstance(raw, dict):
            raise RuleLoadError(f"rule #{i}: must be an object")
        rid = raw.get("id")
        if not isinstance(rid, str) or not rid:
            raise RuleLoadError(f"rule #{i}: missing id")
        if rid in seen:
            raise RuleLoadError(f"rule {rid}: duplicate id")
        seen.add(rid)
        kind = raw.get("trigger_kind", "substring")
        if kind not in ("substring", "regex"):
            raise RuleLoadError(f"rule {rid}: trigger_kind must be 'substring' or 'regex'")
        trigger = raw.get("trigger")
        if not isinstance(trigger, str) or not trigger:
            raise RuleLoadError(f"rule {rid}: missing trigger")
        try:
            rules.append(
                EnrichmentRule(rid, trigger, kind, str(raw.get("correction", "")), str(raw.get("example", "")))
            )
        except re.error as exc:
            raise RuleLoadError(f"rule {rid}: malformed pattern: {exc}") from None
    return rules


def _decode(text: str, where: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise RuleLoadError(f"{where}: invalid JSON: {exc}") from None


def match_rules(instruction: str, rules: list[EnrichmentRule]) -> list[str]:
    return [r.id for r in rules if r.matches(instruction)]


def fired_rules(instruction: str, rules: list[EnrichmentRule]) -> list[EnrichmentRule]:
    return [r for r in rules if r.matches(instruction)]


def correction_block(rule: EnrichmentRule) -> str:
    return f"{BLOCK_START.format(id=rule.id)}\n{rule.correction}\nExample: {rule.example}\n{BLOCK_END}"


def enrich_prompt(base: str, fired: list[EnrichmentRule]) -> str:
    if not fired:
        return base
    return base + "\n\n" + "\n\n".join(correction_block(r) for r in fired)


def count_blocks(prompt: str) -> int:
    return prompt.count(SENTINEL)
