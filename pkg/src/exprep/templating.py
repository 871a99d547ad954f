"""Instantiate global templates against specific instances.

Entity surface strings come from the instance's own tokens, joined with
single spaces; no detokenization beyond that, so identical token content
always yields bit-identical text (which keeps feature caching deterministic).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .data import Explanation, Instance

_PLACEHOLDER_RE = re.compile(r"\{o1\}|\{o2\}")


@dataclass(frozen=True)
class InstantiatedText:
    text: str
    source_id: str
    instance_id: str


def span_text(instance: Instance, span: tuple[int, int]) -> str:
    a, b = span
    return " ".join(instance.tokens[a : b + 1])


def entity_strings(instance: Instance) -> tuple[str, str]:
    return span_text(instance, instance.span1), span_text(instance, instance.span2)


def premise_text(instance: Instance) -> str:
    """The instance sentence as text: tokens joined with single spaces."""
    return " ".join(instance.tokens)


def instantiate(instance: Instance, template: str, source_id: str = "") -> InstantiatedText:
    """Substitute the entity surface strings into {o1}/{o2} placeholders.

    Substitution is a single simultaneous pass, so entity text is never
    re-scanned for placeholders. Templates without placeholders pass through
    unchanged.
    """
    o1, o2 = entity_strings(instance)
    text = _PLACEHOLDER_RE.sub(lambda m: o1 if m.group() == "{o1}" else o2, template)
    return InstantiatedText(text=text, source_id=source_id, instance_id=instance.id)


def instantiate_explanation(instance: Instance, explanation: Explanation) -> InstantiatedText:
    return instantiate(instance, explanation.template, source_id=explanation.id)
