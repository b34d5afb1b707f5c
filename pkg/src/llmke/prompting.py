"""Prompt construction for the three probing settings and reply parsing."""

from __future__ import annotations

import enum
import hashlib
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

from .dataset import GroundTruthRecord, QueryRecord, RelationId, normalize_number, relation_profile

logger = logging.getLogger(__name__)

PLACEHOLDER = "{subject_entity}"


class PromptSetting(str, enum.Enum):
    question = "question"
    triple = "triple"
    context = "context"

    def __str__(self) -> str:
        return self.value


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class Message:
    role: str
    text: str

    def to_wire(self) -> dict:
        return {"role": self.role, "content": self.text}


@dataclass(frozen=True)
class Prompt:
    messages: tuple[Message, ...]
    setting: PromptSetting
    relation: RelationId
    subject_label: str

    @property
    def final_text(self) -> str:
        return self.messages[-1].text


@dataclass(frozen=True)
class FewShotExample:
    subject_label: str
    query_text: str
    answer_text: str


def _templates_raw() -> str:
    return resources.files("llmke.data").joinpath("templates.json").read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def _template_doc() -> dict:
    return json.loads(_templates_raw())


def templates_checksum() -> str:
    return hashlib.sha256(_templates_raw().encode("utf-8")).hexdigest()


def format_instruction() -> str:
    return _template_doc()["format_instruction"]


def question_text(subject_label: str, relation: RelationId) -> str:
    template = _template_doc()["templates"][RelationId.parse(relation).value]
    # plain splice: no escaping, no str.format on user text
    return template.replace(PLACEHOLDER, subject_label)


def triple_text(subject_label: str, relation: RelationId) -> str:
    if not subject_label.strip():
        raise PromptError("empty subject label")
    return f"{subject_label}, {RelationId.parse(relation).value}: {format_instruction()}"


def render_object_list(labels: Sequence[str]) -> str:
    """Canonical bracketed list literal; the empty answer is ``[""]``."""
    return json.dumps(list(labels) or [""], ensure_ascii=False)


def _messages(query: str, examples: Iterable[FewShotExample], system: str | None,
              query_for) -> tuple[Message, ...]:
    msgs = []
    if system:
        msgs.append(Message("system", system))
    for ex in examples:
        msgs.append(Message("user", query_for(ex)))
        msgs.append(Message("assistant", ex.answer_text))
    msgs.append(Message("user", query))
    return tuple(msgs)


def build_question_prompt(record: QueryRecord, examples: Sequence[FewShotExample] = (),
                          system: str | None = None) -> Prompt:
    msgs = _messages(
        question_text(record.subject_label, record.relation), examples, system,
        lambda ex: question_text(ex.subject_label, record.relation),
    )
    return Prompt(msgs, PromptSetting.question, record.relation, record.subject_label)


def build_triple_prompt(record: QueryRecord, examples: Sequence[FewShotExample] = (),
                        system: str | None = None) -> Prompt:
    msgs = _messages(
        triple_text(record.subject_label, record.relation), examples, system,
        lambda ex: triple_text(ex.subject_label, record.relation),
    )
    return Prompt(msgs, PromptSetting.triple, record.relation, record.subject_label)


def context_followup_text(record: QueryRecord, context_text: str) -> str:
    return (
        f"Given the context: {context_text}, compared and combined with the previous "
        f"predictions, {question_text(record.subject_label, record.relation)}"
    )


def build_context_followup_prompt(record: QueryRecord, context_text: str, prior_answer_text: str,
                                  examples: Sequence[FewShotExample] = (),
                                  system: str | None = None) -> Prompt:
    """Second turn of the two-step context exchange.

    The step-one question (with its demonstrations) and the model's raw
    step-one reply are kept as history; demonstrations are not repeated.
    """
    if not context_text:
        logger.warning("empty context for %s / %s", record.subject_label, record.relation)
    first = build_question_prompt(record, examples, system)
    msgs = first.messages + (
        Message("assistant", prior_answer_text),
        Message("user", context_followup_text(record, context_text)),
    )
    return Prompt(msgs, PromptSetting.context, record.relation, record.subject_label)


def select_few_shot(train: Iterable[GroundTruthRecord], relation: RelationId,
                    k: int = 3) -> list[FewShotExample]:
    """Pick ``k`` demonstrations for ``relation``.

    Rows are ordered by numeric subject QID; for relations known to be
    nullable the last slot goes to an empty-answer row when one exists.
    """
    relation = RelationId.parse(relation)
    if k <= 0:
        return []
    rows = sorted((r for r in train if r.relation is relation), key=lambda r: int(r.subject_qid[1:]))
    if len(rows) < k:
        raise PromptError(f"need {k} training rows for {relation}, found {len(rows)}")
    chosen = rows[:k]
    if relation_profile(relation).nullable and not any(not r.object_labels for r in chosen):
        empty = next((r for r in rows if not r.object_labels), None)
        if empty is not None:
            chosen = chosen[: k - 1] + [empty]
    return [
        FewShotExample(r.subject_label, question_text(r.subject_label, relation),
                       render_object_list(r.object_labels))
        for r in chosen
    ]


# -- reply parsing ------------------------------------------------------------


class ParseFailure(list):
    """Empty result returned when no list literal can be found in a reply."""

    def __init__(self, raw: str):
        super().__init__()
        self.raw = raw

    def __repr__(self) -> str:
        return f"ParseFailure({self.raw[:60]!r})"


_NULL_TOKENS = {"none", "null", "nan"}


def _scan_list(text: str, start: int) -> list[str] | None:
    """Parse a flat list literal whose '[' is at ``start``; None if malformed."""
    i = start + 1
    n = len(text)
    items: list[str] = []
    while True:
        while i < n and text[i] in " \t\r\n":
            i += 1
        if i >= n:
            return None
        ch = text[i]
        if ch == "]":
            return items
        if ch in "\"'":
            quote = ch
            buf = []
            i += 1
            while True:
                if i >= n:
                    return None
                c = text[i]
                if c == "\\" and i + 1 < n:
                    buf.append(text[i + 1])
                    i += 2
                    continue
                if c == quote:
                    # only a quote followed by ',' or ']' closes the element,
                    # so apostrophes inside single-quoted names survive
                    j = i + 1
                    while j < n and text[j] in " \t\r\n":
                        j += 1
                    if j < n and text[j] in ",]":
                        i = j
                        break
                buf.append(c)
                i += 1
            items.append("".join(buf).strip())
        elif ch == "[":
            return None
        else:
            j = i
            while j < n and text[j] not in ",]\n[":
                j += 1
            if j >= n or text[j] in "\n[":
                return None
            token = text[i:j].strip()
            if token.casefold() not in _NULL_TOKENS:
                items.append(token)
            i = j
        if text[i] == ",":
            i += 1
        elif text[i] != "]":
            return None


def parse_object_list(raw: str) -> list[str]:
    """Extract the first bracketed list literal from a model reply.

    Returns the non-empty, trimmed elements in order (duplicates kept). When no
    list can be parsed the result is a :class:`ParseFailure`, which is empty.
    """
    if not isinstance(raw, str):
        raw = "" if raw is None else str(raw)
    pos = raw.find("[")
    while pos != -1:
        items = _scan_list(raw, pos)
        if items is not None:
            return [x for x in items if x]
        pos = raw.find("[", pos + 1)
    return ParseFailure(raw)


def normalize_numeric_labels(labels: Iterable[str]) -> list[str]:
    out = []
    for label in labels:
        value = normalize_number(label)
        if value is None:
            logger.info("dropping non-numeric answer %r", label)
            continue
        out.append(value)
    return out
