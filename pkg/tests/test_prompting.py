import json

import pytest
from hypothesis import given, strategies as st

from llmke.dataset import GroundTruthRecord, QueryRecord, RelationId, load_records
from llmke.prompting import (FewShotExample, PromptError, PromptSetting, build_context_followup_prompt,
                             build_question_prompt, build_triple_prompt, format_instruction, parse_object_list,
                             question_text, render_object_list, select_few_shot, templates_checksum, triple_text)

# Pinned so that any edit to the shipped templates is a deliberate, reviewed change.
TEMPLATES_SHA256 = "9688c26e617c6253dd08275f5ec8d48688f95f46a65084c9502baac959a1799c"


def test_templates_pinned():
    assert templates_checksum() == TEMPLATES_SHA256


@pytest.mark.parametrize("rel", list(RelationId))
def test_every_template_renders(rel):
    q = question_text("Zanzibar", rel)
    assert "Zanzibar" in q and "{" not in q.replace('["', "").replace("{subject", "")
    assert "{subject_entity}" not in q
    assert q.endswith(format_instruction())


def test_subject_is_spliced_verbatim():
    # braces and format specs in labels must not be interpreted
    q = question_text("{0} {subject_entity!r} 100%", RelationId.BandHasMember)
    assert q.startswith("Who are the members of {0} {subject_entity!r} 100%?")


def test_triple_text():
    assert triple_text("Brazil", RelationId.CountryBordersCountry) == (
        "Brazil, CountryBordersCountry: " + format_instruction())
    with pytest.raises(PromptError):
        triple_text("  ", RelationId.CountryBordersCountry)


def test_question_prompt_with_demonstrations():
    rec = QueryRecord("Paris", "Q90", RelationId.CityLocatedAtRiver)
    ex = [FewShotExample("Rome", "unused", '["Tiber"]')]
    p = build_question_prompt(rec, ex, system="be terse")
    roles = [m.role for m in p.messages]
    assert roles == ["system", "user", "assistant", "user"]
    assert p.messages[1].text == question_text("Rome", RelationId.CityLocatedAtRiver)
    assert p.messages[2].text == '["Tiber"]'
    assert p.final_text == question_text("Paris", RelationId.CityLocatedAtRiver)
    t = build_triple_prompt(rec, ex)
    assert t.setting is PromptSetting.triple
    assert t.messages[0].text == triple_text("Rome", RelationId.CityLocatedAtRiver)


def test_context_followup_structure():
    rec = QueryRecord("Prague", "Q1085", RelationId.CityLocatedAtRiver)
    ex = [FewShotExample("Rome", "unused", '["Tiber"]')]
    p = build_context_followup_prompt(rec, "CTX", '["Vltava"]', ex)
    first = build_question_prompt(rec, ex)
    assert p.messages[: len(first.messages)] == first.messages
    assert p.messages[-2].role == "assistant" and p.messages[-2].text == '["Vltava"]'
    assert p.messages[-1].text == ("Given the context: CTX, compared and combined with the previous "
                                   "predictions, " + question_text("Prague", RelationId.CityLocatedAtRiver))
    # demonstrations appear once
    assert sum(m.text == '["Tiber"]' for m in p.messages) == 1


def test_context_followup_warns_on_empty(caplog):
    rec = QueryRecord("Prague", "Q1085", RelationId.CityLocatedAtRiver)
    build_context_followup_prompt(rec, "", "[]")
    assert "empty context" in caplog.text


def test_render_object_list():
    assert render_object_list([]) == '[""]'
    assert render_object_list(["Côte d'Ivoire"]) == '["Côte d\'Ivoire"]'


def _truth(label, qid, rel, objs):
    return GroundTruthRecord(label, qid, rel, tuple(objs), tuple(f"Q{i + 1000}" for i, _ in enumerate(objs)))


def test_few_shot_selection_is_sorted_by_numeric_qid():
    rel = RelationId.CityLocatedAtRiver
    train = [_truth("c", "Q100", rel, ["x"]), _truth("a", "Q9", rel, ["y"]), _truth("b", "Q20", rel, ["z"]),
             _truth("d", "Q3", RelationId.BandHasMember, ["w"])]
    assert [e.subject_label for e in select_few_shot(train, rel, 2)] == ["a", "b"]
    with pytest.raises(PromptError):
        select_few_shot(train, rel, 4)
    assert select_few_shot(train, rel, 0) == []


def test_few_shot_nullable_includes_empty_answer(mini):
    train = load_records(mini / "train.jsonl", expect_truth=True)
    shots = select_few_shot(train, RelationId.PersonHasNobelPrize)
    assert len(shots) == 3
    assert sum(s.answer_text == '[""]' for s in shots) == 1
    rel = RelationId.PersonCauseOfDeath
    rows = [_truth(f"p{i}", f"Q{i}", rel, ["x"]) for i in (1, 2, 3, 4)] + [GroundTruthRecord("e", "Q9", rel)]
    shots = select_few_shot(rows, rel)
    assert [s.subject_label for s in shots] == ["p1", "p2", "e"]
    # non-nullable relations keep plain QID order
    shots = select_few_shot(train, RelationId.CityLocatedAtRiver)
    assert all(s.answer_text != '[""]' for s in shots)


@given(st.lists(st.text(st.characters(blacklist_categories=("Cs", "Cc")), min_size=1).filter(
    lambda s: s.strip() == s and s), max_size=8))
def test_rendered_lists_parse_back(labels):
    assert parse_object_list(render_object_list(labels)) == labels
    assert parse_object_list("Answer: " + json.dumps(labels, ensure_ascii=False) + " hope this helps") == labels
