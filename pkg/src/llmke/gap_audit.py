"""Knowledge-gap triage: live Wikidata truth versus model predictions."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import httpx

from .dataset import QID_RE, RelationId, normalize_number, relation_profile
from .evaluation import id_set, row_scores
from .http import HostPacer, LookupStore, RetryPolicy, USER_AGENT, request_with_retry

logger = logging.getLogger(__name__)

WDQS_ENDPOINT = "https://query.wikidata.org/sparql"

TRUTH_QUERY = """SELECT DISTINCT ?o WHERE {{
  wd:{subject} wdt:{pid} ?o .
}}"""

PID_TYPE_QUERY = """SELECT ?pid ?type WHERE {{
  VALUES ?p {{ {props} }}
  ?p wikibase:propertyType ?type .
  BIND(STRAFTER(STR(?p), "/entity/") AS ?pid)
}}"""


class Classification(str, enum.Enum):
    aligned = "aligned"
    model_gap = "model_gap"
    kb_gap_candidate = "kb_gap_candidate"


class AuditError(ValueError):
    pass


@dataclass(frozen=True)
class GapFinding:
    subject_qid: str
    subject_label: str
    relation: RelationId
    predicted_ids: frozenset[str]
    wikidata_ids: frozenset[str]
    divergence: float
    classification: Classification
    predicted_labels: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "SubjectEntity": self.subject_label,
            "SubjectEntityID": self.subject_qid,
            "Relation": self.relation.value,
            "PredictedIDs": sorted(self.predicted_ids),
            "WikidataIDs": sorted(self.wikidata_ids),
            "Divergence": self.divergence,
            "Classification": self.classification.value,
        }


class SparqlClient:
    def __init__(self, store: LookupStore, client: httpx.Client | None = None,
                 endpoint: str = WDQS_ENDPOINT, policy: RetryPolicy | None = None,
                 pacer: HostPacer | None = None):
        self.store = store
        self.endpoint = endpoint
        self.policy = policy
        self.pacer = pacer
        self._client = client

    @property
    def client(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(timeout=60.0, headers={
                "User-Agent": USER_AGENT, "Accept": "application/sparql-results+json"})
        return self._client

    def _run(self, query: str) -> list[dict]:
        resp = request_with_retry(self.client, "GET", self.endpoint,
                                  params={"query": query, "format": "json"},
                                  policy=self.policy, pacer=self.pacer)
        return resp.json()["results"]["bindings"]

    def select(self, query: str) -> list[dict]:
        return self.store.get("wdqs", query, lambda: self._run(query))


def _binding_value(b: dict) -> str | None:
    o = b.get("o")
    if not o:
        return None
    value = o["value"]
    if o.get("type") == "uri":
        tail = value.rsplit("/", 1)[-1]
        return tail if QID_RE.fullmatch(tail) else None
    return normalize_number(value.split(".")[0]) if value else None


def fetch_wikidata_truth(subject_qid: str, relation: RelationId | str, sparql: SparqlClient) -> set[str]:
    """Objects of current truthy statements for (subject, relation's PID)."""
    profile = relation_profile(relation)
    if not profile.pid:
        raise AuditError(f"no Wikidata property configured for {profile.relation}")
    if not QID_RE.fullmatch(subject_qid):
        raise AuditError(f"bad subject QID {subject_qid!r}")
    rows = sparql.select(TRUTH_QUERY.format(subject=subject_qid, pid=profile.pid))
    values = {v for v in (_binding_value(b) for b in rows) if v is not None}
    if profile.object_filter:
        values &= set(profile.object_filter)
    return values


def validate_pid_types(sparql: SparqlClient) -> dict[str, tuple[str, str]]:
    """Check every configured PID's datatype; returns mismatches {relation: (expected, actual)}."""
    profiles = [relation_profile(r) for r in RelationId]
    props = " ".join(sorted({f"wd:{p.pid}" for p in profiles if p.pid}))
    rows = sparql.select(PID_TYPE_QUERY.format(props=props))
    actual = {b["pid"]["value"]: b["type"]["value"].rsplit("#", 1)[-1] for b in rows}
    bad = {}
    for p in profiles:
        got = actual.get(p.pid)
        if got != p.pid_datatype:
            bad[p.relation.value] = (p.pid_datatype, got)
    return bad


def is_corroborated(labels: Iterable[str], context_text: str) -> bool:
    labels = [x for x in labels if x]
    if not labels or not context_text:
        return False
    haystack = context_text.casefold()
    return all(x.casefold() in haystack for x in labels)


def classify(divergence: float, corroborated: bool, aligned_below: float = 0.25,
             gap_at_least: float = 0.75) -> Classification:
    if divergence < aligned_below:
        return Classification.aligned
    if divergence >= gap_at_least and corroborated:
        return Classification.kb_gap_candidate
    return Classification.model_gap


def audit_gaps(preds: Iterable, live_truth: Mapping | Callable[[str, RelationId], set[str]],
               context_text: Callable[[object], str] | Mapping | None = None,
               aligned_below: float = 0.25, gap_at_least: float = 0.75) -> list[GapFinding]:
    """Rank prediction rows by disagreement with current Wikidata.

    ``live_truth`` maps ``(subject_qid, relation)`` to an ID set, or is a
    callable with that signature. ``context_text`` supplies retrieved text per
    prediction row (mapping keyed like ``live_truth`` or a callable on the row)
    for the corroboration check; without it nothing is a kb_gap_candidate.
    """
    findings = []
    for p in preds:
        relation = RelationId.parse(p.relation)
        key = (p.subject_qid, relation)
        truth = live_truth(*key) if callable(live_truth) else live_truth.get(key, set())
        predicted, wd = id_set(p.object_ids), id_set(truth)
        divergence = 1.0 - row_scores(predicted, wd).f1
        if context_text is None:
            text = ""
        elif callable(context_text):
            text = context_text(p) or ""
        else:
            text = context_text.get(key, "")
        corroborated = is_corroborated(p.object_labels, text)
        findings.append(GapFinding(
            p.subject_qid, p.subject_label, relation, frozenset(predicted), frozenset(wd),
            divergence, classify(divergence, corroborated, aligned_below, gap_at_least),
            tuple(p.object_labels),
        ))
    # stable: ties keep input order
    return sorted(findings, key=lambda f: -f.divergence)


def render_findings(findings: list[GapFinding]) -> str:
    lines = ["rank  divergence  classification    relation / subject"]
    for i, f in enumerate(findings, 1):
        lines.append(f"{i:4d}  {f.divergence:10.4f}  {f.classification.value:<16}  "
                     f"{f.relation.value} / {f.subject_label} ({f.subject_qid})")
        lines.append(f"      predicted={sorted(f.predicted_ids)} wikidata={sorted(f.wikidata_ids)}")
    return "\n".join(lines) + "\n"


def findings_jsonl(findings: list[GapFinding]) -> str:
    return "".join(json.dumps(f.to_dict(), ensure_ascii=False) + "\n" for f in findings)
