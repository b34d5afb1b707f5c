"""Acceptance criteria, one test per criterion; a summary line per criterion is printed at the end."""

from __future__ import annotations

import functools
import json
import os
import random
import time
from fractions import Fraction

import pytest

from llmke.dataset import RelationId, Strategy, load_records, relation_profile
from llmke.entity_mapping import WikidataSearch, disambiguate_baseline, map_objects
from llmke.evaluation import overall_report, row_scores
from llmke.http import LookupStore
from llmke.pipeline import RunConfig, run
from llmke.prompting import ParseFailure, parse_object_list, question_text

from conftest import ACCEPTANCE
from test_evaluation import MACRO_CASE, load_macro_case
from test_parser_corpus import CORPUS


def criterion(n: int, title: str):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            detail = kwargs.get("detail", [])
            try:
                fn(*args, **kwargs)
            except pytest.skip.Exception as e:
                ACCEPTANCE[n] = ("SKIP", title, str(e.msg))
                raise
            except BaseException:
                ACCEPTANCE[n] = ("FAIL", title, "; ".join(detail))
                raise
            status = "INFO" if "informational" in detail else "PASS"
            ACCEPTANCE[n] = (status, title, "; ".join(d for d in detail if d != "informational"))
        return wrapper
    return deco


@pytest.fixture
def detail() -> list[str]:
    return []


def _mini_config(mini, out, setting="context", mode="improved"):
    return RunConfig(input_path=str(mini / "test.jsonl"), train_path=str(mini / "train.jsonl"),
                     truth_path=str(mini / "test_truth.jsonl"), output_dir=str(out), fixture_dir=str(mini),
                     setting=setting, disambiguation_mode=mode)


@criterion(1, "replay determinism: byte-identical predictions and reports in < 30 s")
def test_ac1_replay_determinism(mini, tmp_path, detail):
    start = time.perf_counter()
    run(_mini_config(mini, tmp_path / "a"))
    run(_mini_config(mini, tmp_path / "b"))
    elapsed = time.perf_counter() - start
    detail.append(f"{elapsed:.2f}s for two context-setting runs")
    for name in ("predictions.jsonl", "report.json", "report.txt", "contexts.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    assert len((tmp_path / "a" / "predictions.jsonl").read_text().splitlines()) == 105
    assert elapsed < 30


def brute_force(pred: list[str], truth: list[str]) -> tuple[Fraction, Fraction, Fraction]:
    """Independent overlap count by pairwise comparison, in exact arithmetic."""
    p_unique = [x for i, x in enumerate(pred) if x not in pred[:i]]
    t_unique = [x for i, x in enumerate(truth) if x not in truth[:i]]
    if not p_unique and not t_unique:
        return Fraction(1), Fraction(1), Fraction(1)
    if not p_unique or not t_unique:
        return Fraction(0), Fraction(0), Fraction(0)
    hits = 0
    for a in p_unique:
        for b in t_unique:
            if a == b:
                hits += 1
    p, r = Fraction(hits, len(p_unique)), Fraction(hits, len(t_unique))
    f1 = Fraction(0) if hits == 0 else 2 * p * r / (p + r)
    return p, r, f1


@criterion(2, "evaluator matches brute-force oracle on 1,000 random instances; zero-object conventions")
def test_ac2_oracle_equivalence(detail):
    rng = random.Random(20231106)
    pool = [f"Q{i}" for i in range(1, 10)]
    for _ in range(1000):
        pred = [rng.choice(pool) for _ in range(rng.randint(0, 6))]
        truth = rng.sample(pool, rng.randint(0, 6))
        s = row_scores(pred, truth)
        p, r, f1 = brute_force(pred, truth)
        assert (s.precision, s.recall, s.f1) == (float(p), float(r), float(f1)), (pred, truth)
    for pred, truth, want in (([], [], 1.0), ([], ["Q1"], 0.0), (["Q1"], [], 0.0)):
        s = row_scores(pred, truth)
        assert (s.precision, s.recall, s.f1) == (want, want, want)
    detail.append("1000 instances")


@criterion(3, "macro aggregation equals the hand computation to 1e-9")
def test_ac3_macro_aggregation(detail):
    preds, truths, want = load_macro_case()
    report = overall_report(preds, truths)
    assert len(truths) == 5 and len(report.per_relation) == 2
    for rel, exp in want["per_relation"].items():
        got = report.per_relation[rel]
        for k in ("p", "r", "f1"):
            assert abs(getattr(got, k) - float(Fraction(exp[k]))) <= 1e-9
    for k in ("p", "r", "f1"):
        assert abs(getattr(report.overall, k) - float(Fraction(want["overall"][k]))) <= 1e-9
        assert abs(getattr(report.zero_object_row, k) - float(Fraction(want["zero_object"][k]))) <= 1e-9
    detail.append(f"oracle: {MACRO_CASE.name}")


@criterion(4, "parser corpus (>= 20 variants) parses to expected lists")
def test_ac4_parser_corpus(detail):
    assert len(CORPUS) >= 20
    for raw, expected in CORPUS:
        got = parse_object_list(raw)
        if expected is None:
            assert isinstance(got, ParseFailure) and got == []
        else:
            assert got == expected, raw
    assert parse_object_list('[""]') == []
    detail.append(f"{len(CORPUS)} variants")


@criterion(5, "case disambiguation (mercury -> Q925 / rank-0) and keyword minimal-rank choice")
def test_ac5_disambiguation(mini, detail):
    search = WikidataSearch(LookupStore(None, offline=True, extra_paths=(mini / "lookups.jsonl",)))
    cands = search.search_candidates("mercury")
    assert {"Q925", "Q308"} <= {c.qid for c in cands}
    rec = next(r for r in load_records(mini / "test.jsonl") if r.subject_label == "mercury(II) chloride")
    profile = relation_profile(RelationId.CompoundHasParts)
    improved = map_objects(["mercury"], rec, profile, search=search, improved=True)[0]
    baseline = map_objects(["mercury"], rec, profile, search=search, improved=False)[0]
    assert improved.resolved_qid == "Q925"
    assert baseline.resolved_qid == disambiguate_baseline(cands) == min(cands, key=lambda c: c.rank).qid

    lang = next(r for r in load_records(mini / "test.jsonl") if r.relation is RelationId.CountryHasOfficialLanguage)
    profile = relation_profile(RelationId.CountryHasOfficialLanguage)
    french = search.search_candidates("French")
    out = map_objects(["French"], lang, profile, search=search, improved=True)[0]
    matching = [c for c in french if any(k in c.description.casefold() for k in profile.keyword_terms)]
    assert out.strategy_used is Strategy.keyword
    assert out.resolved_qid == min(matching, key=lambda c: c.rank).qid == "Q150"
    assert french[0].qid != "Q150"  # rank 0 is not the language, so keyword matching did the work
    detail.append(f"baseline picked {baseline.resolved_qid}")


@criterion(6, "all 21 templates render; Brazil border question is exact")
def test_ac6_template_fidelity():
    for rel in RelationId:
        text = question_text("Brazil", rel)
        assert "Brazil" in text and "{subject_entity}" not in text
    assert "Which countries share borders with Brazil?" in question_text("Brazil", RelationId.CountryBordersCountry)


TABLE_DISAMBIGUATION = {
    "BandHasMember": "keyword", "CityLocatedAtRiver": "lm", "CompanyHasParentOrganisation": "baseline",
    "CompoundHasParts": "case", "CountryBordersCountry": "baseline", "CountryHasOfficialLanguage": "keyword",
    "CountryHasStates": "lm", "FootballerPlaysPosition": "case", "PersonCauseOfDeath": "baseline",
    "PersonHasAutobiography": "keyword", "PersonHasEmployer": "case", "PersonHasNobelPrize": "baseline",
    "PersonHasNumberOfChildren": "none", "PersonHasPlaceOfDeath": "baseline", "PersonHasProfession": "case",
    "PersonHasSpouse": "lm", "PersonPlaysInstrument": "case", "PersonSpeaksLanguage": "baseline",
    "RiverBasinsCountry": "case", "SeriesHasNumberOfEpisodes": "none", "StateBordersState": "lm",
}


@criterion(7, "improved-mode strategy per relation matches the published dispatch table")
def test_ac7_strategy_dispatch():
    assert set(TABLE_DISAMBIGUATION) == {r.value for r in RelationId}
    for rel in RelationId:
        assert relation_profile(rel).disambiguation.value == TABLE_DISAMBIGUATION[rel.value], rel


LIVE_KEY_ENV = os.environ.get("LLMKE_KEY_ENV", "OPENAI_API_KEY")
REFERENCE_F1 = 0.843


@pytest.mark.live
@criterion(8, "live smoke (non-gating): context CompoundHasParts F1 within 0.10 of 0.843")
def test_ac8_live_smoke(mini, tmp_path, detail):
    if not os.environ.get(LIVE_KEY_ENV):
        pytest.skip(f"no credential in ${LIVE_KEY_ENV}")
    split = os.environ.get("LLMKE_LIVE_TRUTH", str(mini / "test_truth.jsonl"))
    train = os.environ.get("LLMKE_LIVE_TRAIN", str(mini / "train.jsonl"))
    rows = [json.loads(x) for x in open(split, encoding="utf-8") if x.strip()]
    rows = [r for r in rows if r["Relation"] == "CompoundHasParts"]
    subset = tmp_path / "compound.jsonl"
    subset.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    cfg = RunConfig(input_path=str(subset), train_path=train, truth_path=str(subset),
                    output_dir=str(tmp_path / "out"), setting="context", provider="live",
                    model_name=os.environ.get("LLMKE_LIVE_MODEL", "gpt-4"), key_env=LIVE_KEY_ENV,
                    cache_dir=str(tmp_path / "cache"))
    f1 = run(cfg).report.per_relation["CompoundHasParts"].f1
    within = abs(f1 - REFERENCE_F1) <= 0.10
    detail.append(f"F1={f1:.3f} on {len(rows)} rows, {'within' if within else 'outside'} tolerance")
    detail.append("informational")
