import json

import pytest
from hypothesis import given, strategies as st

from llmke.dataset import (MAX_OBJECTS, ContextPolicy, DatasetError, GroundTruthRecord, QueryRecord, RelationId,
                           Strategy, load_profiles, load_records, normalize_number, record_from_dict,
                           relation_profile, write_records)


def test_twenty_one_relations():
    assert len(RelationId) == 21
    assert RelationId.parse("PersonHasNoblePrize") is RelationId.PersonHasNobelPrize
    with pytest.raises(DatasetError):
        RelationId.parse("PersonHasCat")


def test_bundled_split_shape(mini):
    test = load_records(mini / "test.jsonl")
    truth = load_records(mini / "test_truth.jsonl", expect_truth=True)
    assert len(test) == len(truth) == 105
    counts = {}
    for r in truth:
        counts[r.relation] = counts.get(r.relation, 0) + 1
    assert counts == {r: 5 for r in RelationId}
    assert [r.key for r in test] == [r.key for r in truth]


def test_bad_qid_rejected():
    with pytest.raises(DatasetError):
        QueryRecord("Paris", "90", RelationId.CityLocatedAtRiver)


def test_parallel_lengths_and_limit():
    with pytest.raises(DatasetError, match="differ in length"):
        GroundTruthRecord("x", "Q1", RelationId.BandHasMember, ("a", "b"), ("Q2",))
    ids = tuple(f"Q{i}" for i in range(MAX_OBJECTS + 1))
    with pytest.raises(DatasetError, match="limit"):
        GroundTruthRecord("x", "Q1", RelationId.BandHasMember, ids, ids)


def test_empty_string_sentinel_means_no_objects():
    rec = record_from_dict({"SubjectEntity": "Apple Inc.", "SubjectEntityID": "Q312",
                            "Relation": "CompanyHasParentOrganisation",
                            "ObjectEntities": [""], "ObjectEntitiesID": [""]}, expect_truth=True)
    assert rec.object_ids == () and rec.object_labels == ()


def test_numeric_ids_canonicalised():
    rec = record_from_dict({"SubjectEntity": "Friends", "SubjectEntityID": "Q79784",
                            "Relation": "SeriesHasNumberOfEpisodes",
                            "ObjectEntities": ["236"], "ObjectEntitiesID": ["0236"]}, expect_truth=True)
    assert rec.object_ids == ("236",)


def test_line_number_in_errors(tmp_path):
    p = tmp_path / "bad.jsonl"
    good = {"SubjectEntity": "Paris", "SubjectEntityID": "Q90", "Relation": "CityLocatedAtRiver"}
    p.write_text(json.dumps(good) + "\n" + json.dumps({**good, "SubjectEntityID": "nope"}) + "\n")
    with pytest.raises(DatasetError) as err:
        load_records(p)
    assert err.value.line == 2
    p.write_text(json.dumps(good) + "\n{not json\n")
    with pytest.raises(DatasetError, match=":2:"):
        load_records(p)


@pytest.mark.parametrize("text,expected", [
    ("62", "62"), ("1,024", "1024"), ("about 4 sons", "4"), ("007", "7"), ("two", None), ("", None),
])
def test_normalize_number(text, expected):
    assert normalize_number(text) == expected


def test_profile_table_consistency():
    for rel in RelationId:
        p = relation_profile(rel)
        assert p.is_numeric == (p.disambiguation is Strategy.none)
        if p.disambiguation is Strategy.keyword:
            assert p.keyword_terms
        assert p.pid and p.pid.startswith("P")
    assert relation_profile("CountryHasStates").context_policy is ContextPolicy.wikipedia_admin_division
    assert relation_profile("SeriesHasNumberOfEpisodes").context_policy is ContextPolicy.wikipedia_plus_imdb
    assert relation_profile("CompoundHasParts").case_overrides == {"mercury": "Q925"}


def test_profile_validation_rejects_gaps():
    import yaml
    from importlib import resources
    doc = yaml.safe_load(resources.files("llmke.data").joinpath("relations.yaml").read_text())
    partial = dict(doc)
    partial["relations"] = {k: v for k, v in doc["relations"].items() if k != "BandHasMember"}
    with pytest.raises(DatasetError, match="BandHasMember"):
        load_profiles(yaml.safe_dump(partial))
    broken = json.loads(json.dumps(doc))
    broken["relations"]["BandHasMember"]["keyword_terms"] = []
    with pytest.raises(DatasetError, match="keyword_terms"):
        load_profiles(yaml.safe_dump(broken))


labels = st.text(st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=12).filter(str.strip)


@given(st.lists(st.tuples(labels, st.integers(1, 10**9)), max_size=MAX_OBJECTS, unique_by=lambda x: x[1]))
def test_write_load_round_trip(tmp_path_factory, objs):
    rec = GroundTruthRecord("Sub ject", "Q42", RelationId.PersonHasEmployer,
                            tuple(o[0] for o in objs), tuple(f"Q{o[1]}" for o in objs))
    path = tmp_path_factory.mktemp("rt") / "r.jsonl"
    write_records(path, [rec])
    assert load_records(path, expect_truth=True) == [rec]
