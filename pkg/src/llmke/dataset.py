"""Challenge-format records and the static per-relation profile table."""

from __future__ import annotations

import enum
import json
import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import yaml

logger = logging.getLogger(__name__)

QID_RE = re.compile(r"Q[0-9]+")
MAX_OBJECTS = 20


class RelationId(str, enum.Enum):
    BandHasMember = "BandHasMember"
    CityLocatedAtRiver = "CityLocatedAtRiver"
    CompanyHasParentOrganisation = "CompanyHasParentOrganisation"
    CompoundHasParts = "CompoundHasParts"
    CountryBordersCountry = "CountryBordersCountry"
    CountryHasOfficialLanguage = "CountryHasOfficialLanguage"
    CountryHasStates = "CountryHasStates"
    FootballerPlaysPosition = "FootballerPlaysPosition"
    PersonCauseOfDeath = "PersonCauseOfDeath"
    PersonHasAutobiography = "PersonHasAutobiography"
    PersonHasEmployer = "PersonHasEmployer"
    PersonHasNobelPrize = "PersonHasNobelPrize"
    PersonHasNumberOfChildren = "PersonHasNumberOfChildren"
    PersonHasPlaceOfDeath = "PersonHasPlaceOfDeath"
    PersonHasProfession = "PersonHasProfession"
    PersonHasSpouse = "PersonHasSpouse"
    PersonPlaysInstrument = "PersonPlaysInstrument"
    PersonSpeaksLanguage = "PersonSpeaksLanguage"
    RiverBasinsCountry = "RiverBasinsCountry"
    SeriesHasNumberOfEpisodes = "SeriesHasNumberOfEpisodes"
    StateBordersState = "StateBordersState"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, value: str) -> "RelationId":
        """Exact-name lookup; the challenge files' legacy spelling is the only alias."""
        if value in _RELATION_ALIASES:
            return _RELATION_ALIASES[value]
        try:
            return cls(value)
        except ValueError:
            raise DatasetError(f"unknown relation {value!r}") from None


# Released challenge files spell this relation "PersonHasNoblePrize".
_RELATION_ALIASES = {"PersonHasNoblePrize": RelationId.PersonHasNobelPrize}


class Strategy(str, enum.Enum):
    baseline = "baseline"
    case = "case"
    keyword = "keyword"
    lm = "lm"
    none = "none"

    def __str__(self) -> str:
        return self.value


class ValueKind(str, enum.Enum):
    entity = "entity"
    numeric = "numeric"


class ContextPolicy(str, enum.Enum):
    wikipedia_default = "wikipedia_default"
    wikipedia_admin_division = "wikipedia_admin_division"
    wikipedia_plus_imdb = "wikipedia_plus_imdb"
    none = "none"


class DatasetError(ValueError):
    """Raised for malformed records; carries the line number when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


@dataclass(frozen=True)
class RelationProfile:
    relation: RelationId
    value_kind: ValueKind
    disambiguation: Strategy
    context_policy: ContextPolicy
    # None means the nullability of this relation is not documented.
    nullable: bool | None = None
    keyword_terms: tuple[str, ...] = ()
    case_overrides: Mapping[str, str] = field(default_factory=dict)
    pid: str | None = None
    pid_datatype: str | None = None
    object_filter: tuple[str, ...] = ()

    @property
    def is_numeric(self) -> bool:
        return self.value_kind is ValueKind.numeric


@dataclass(frozen=True)
class QueryRecord:
    subject_label: str
    subject_qid: str
    relation: RelationId

    def __post_init__(self):
        if not QID_RE.fullmatch(self.subject_qid):
            raise DatasetError(f"subject QID {self.subject_qid!r} does not match Q[0-9]+")
        if not isinstance(self.relation, RelationId):
            object.__setattr__(self, "relation", RelationId.parse(self.relation))

    @property
    def key(self) -> tuple[str, RelationId]:
        return (self.subject_qid, self.relation)


@dataclass(frozen=True)
class GroundTruthRecord(QueryRecord):
    object_labels: tuple[str, ...] = ()
    object_ids: tuple[str, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "object_labels", tuple(self.object_labels))
        object.__setattr__(self, "object_ids", tuple(self.object_ids))
        if len(self.object_labels) != len(self.object_ids):
            raise DatasetError(
                f"ObjectEntities ({len(self.object_labels)}) and ObjectEntitiesID "
                f"({len(self.object_ids)}) differ in length for {self.subject_qid}"
            )
        if len(self.object_ids) > MAX_OBJECTS:
            raise DatasetError(f"{len(self.object_ids)} objects exceeds the limit of {MAX_OBJECTS}")

    def as_query(self) -> QueryRecord:
        return QueryRecord(self.subject_label, self.subject_qid, self.relation)


# -- relation profiles -------------------------------------------------------


def _data_text(name: str) -> str:
    return resources.files("llmke.data").joinpath(name).read_text(encoding="utf-8")


def load_profiles(text: str | None = None) -> dict[RelationId, RelationProfile]:
    """Parse a relations YAML document (the bundled one by default)."""
    doc = yaml.safe_load(text if text is not None else _data_text("relations.yaml"))
    profiles = {}
    for name, entry in doc["relations"].items():
        relation = RelationId(name)
        overrides = {k.casefold(): v for k, v in (entry.get("case_overrides") or {}).items()}
        profiles[relation] = RelationProfile(
            relation=relation,
            value_kind=ValueKind(entry["value_kind"]),
            disambiguation=Strategy(entry["disambiguation"]),
            context_policy=ContextPolicy(entry.get("context_policy", "wikipedia_default")),
            nullable=entry.get("nullable"),
            keyword_terms=tuple(entry.get("keyword_terms") or ()),
            case_overrides=overrides,
            pid=entry.get("pid"),
            pid_datatype=entry.get("pid_datatype"),
            object_filter=tuple(entry.get("object_filter") or ()),
        )
    missing = set(RelationId) - set(profiles)
    if missing:
        raise DatasetError(f"relation table lacks {sorted(r.value for r in missing)}")
    for p in profiles.values():
        if p.is_numeric != (p.disambiguation is Strategy.none):
            raise DatasetError(f"{p.relation}: numeric relations, and only they, use strategy 'none'")
        if p.disambiguation is Strategy.keyword and not p.keyword_terms:
            raise DatasetError(f"{p.relation}: keyword strategy needs keyword_terms")
    return profiles


@lru_cache(maxsize=1)
def _bundled_profiles() -> dict[RelationId, RelationProfile]:
    return load_profiles()


def relation_profile(relation: RelationId | str) -> RelationProfile:
    if not isinstance(relation, RelationId):
        relation = RelationId.parse(relation)
    return _bundled_profiles()[relation]


# -- JSONL I/O ----------------------------------------------------------------


def normalize_number(text: str) -> str | None:
    """Canonical decimal string of the first integer in ``text``, or None."""
    m = re.search(r"\d+", text.replace(",", ""))
    if m is None:
        return None
    return str(int(m.group()))


def _normalize_objects(labels, ids, relation: RelationId) -> tuple[list[str], list[str]]:
    labels = [] if labels is None else list(labels)
    ids = [] if ids is None else list(ids)
    if labels == [""]:
        labels = []
    if ids == [""]:
        ids = []
    if relation_profile(relation).is_numeric:
        ids = [normalize_number(str(i)) or str(i) for i in ids]
        labels = [normalize_number(str(x)) or str(x) for x in labels]
    else:
        ids = [str(i).strip().upper() if QID_RE.fullmatch(str(i).strip().upper()) else str(i) for i in ids]
    return labels, ids


def record_from_dict(obj: dict, expect_truth: bool = False) -> QueryRecord:
    for k in ("SubjectEntity", "SubjectEntityID", "Relation"):
        if k not in obj:
            raise DatasetError(f"missing key {k!r}")
    relation = RelationId.parse(obj["Relation"])
    if not expect_truth:
        return QueryRecord(obj["SubjectEntity"], obj["SubjectEntityID"], relation)
    if "ObjectEntitiesID" not in obj:
        raise DatasetError("missing key 'ObjectEntitiesID'")
    labels, ids = _normalize_objects(obj.get("ObjectEntities", []), obj["ObjectEntitiesID"], relation)
    if not labels and ids:
        labels = list(ids)
    return GroundTruthRecord(obj["SubjectEntity"], obj["SubjectEntityID"], relation, labels, ids)


def load_records(path: str | Path, expect_truth: bool = False) -> list:
    """Read a challenge JSONL file into QueryRecords (or GroundTruthRecords)."""
    path = Path(path)
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"invalid JSON: {e.msg}", str(path), lineno) from None
            try:
                records.append(record_from_dict(obj, expect_truth))
            except DatasetError as e:
                raise DatasetError(str(e), str(path), lineno) from None
    return records


def record_to_dict(record) -> dict:
    """Challenge-compatible dict with stable key order.

    Works for ground-truth records and for anything exposing ``to_dict``.
    """
    if hasattr(record, "to_dict"):
        return record.to_dict()
    out = {
        "SubjectEntity": record.subject_label,
        "SubjectEntityID": record.subject_qid,
        "Relation": record.relation.value,
    }
    if isinstance(record, GroundTruthRecord):
        out["ObjectEntities"] = list(record.object_labels)
        out["ObjectEntitiesID"] = list(record.object_ids)
    return out


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror or e}") from e


def write_predictions(path: str | Path, rows: Iterable) -> None:
    write_jsonl(path, (record_to_dict(r) for r in rows))


def write_records(path: str | Path, rows: Iterable) -> None:
    write_jsonl(path, (record_to_dict(r) for r in rows))
