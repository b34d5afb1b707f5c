"""Link object strings to Wikidata QIDs: candidate search plus disambiguation."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import asdict, dataclass
from typing import Sequence

import httpx

from .dataset import QID_RE, QueryRecord, RelationProfile, Strategy, normalize_number
from .http import HostPacer, LookupStore, RetryPolicy, USER_AGENT, request_with_retry
from .llm_client import ChatRequest, LLMClient
from .prompting import question_text

logger = logging.getLogger(__name__)

WIKIDATA_API = "https://www.wikidata.org/w/api.php"
SEARCH_LIMIT = 10

NO_CANDIDATES = "no_candidates"
UNRESOLVED = "surface_ambiguity_unresolved"


@dataclass(frozen=True)
class Candidate:
    qid: str
    label: str
    description: str = ""
    aliases: tuple[str, ...] = ()
    rank: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["aliases"] = list(self.aliases)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Candidate":
        return cls(d["qid"], d.get("label", ""), d.get("description", "") or "",
                   tuple(d.get("aliases") or ()), int(d.get("rank", 0)))


@dataclass(frozen=True)
class MappingOutcome:
    object_label: str
    resolved_qid: str | None
    strategy_used: Strategy
    candidate_count: int = 0
    error_class: str | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.object_label,
            "qid": self.resolved_qid,
            "strategy": self.strategy_used.value,
            "candidates": self.candidate_count,
            "error": self.error_class,
        }


class WikidataSearch:
    """``wbsearchentities`` candidate search, cached per (label, limit)."""

    def __init__(self, store: LookupStore, client: httpx.Client | None = None,
                 api_url: str = WIKIDATA_API, limit: int = SEARCH_LIMIT, language: str = "en",
                 policy: RetryPolicy | None = None, pacer: HostPacer | None = None):
        self.store = store
        self.api_url = api_url
        self.limit = limit
        self.language = language
        self.policy = policy
        self.pacer = pacer
        self._client = client

    @property
    def client(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(timeout=30.0, headers={"User-Agent": USER_AGENT})
        return self._client

    def _get(self, **params) -> dict:
        params = {"format": "json", **params}
        return request_with_retry(self.client, "GET", self.api_url, params=params,
                                  policy=self.policy, pacer=self.pacer).json()

    def _fetch(self, label: str) -> list[dict]:
        data = self._get(action="wbsearchentities", search=label, language=self.language,
                         uselang=self.language, type="item", limit=str(self.limit))
        hits = data.get("search", [])
        cands = []
        for rank, hit in enumerate(hits):
            aliases = hit.get("aliases") or []
            if hit.get("match", {}).get("type") == "alias":
                aliases = aliases or [hit["match"].get("text", "")]
            cands.append({"qid": hit["id"], "label": hit.get("label", ""),
                          "description": hit.get("description"), "aliases": aliases, "rank": rank})
        missing = [c["qid"] for c in cands if c["description"] is None]
        if missing:
            self._backfill(cands, missing)
        for c in cands:
            c["description"] = c["description"] or ""
        return cands

    def _backfill(self, cands: list[dict], qids: list[str]) -> None:
        data = self._get(action="wbgetentities", ids="|".join(qids), props="descriptions|aliases",
                         languages=self.language)
        entities = data.get("entities", {})
        for c in cands:
            ent = entities.get(c["qid"], {})
            if c["description"] is None:
                c["description"] = ent.get("descriptions", {}).get(self.language, {}).get("value", "")
            if not c["aliases"]:
                c["aliases"] = [a["value"] for a in ent.get("aliases", {}).get(self.language, [])]

    def search_candidates(self, label: str) -> list[Candidate]:
        if not label or not label.strip():
            raise ValueError("candidate search needs a non-empty label")
        rows = self.store.get("wikidata.search", [label, self.limit], lambda: self._fetch(label))
        cands = [Candidate.from_dict(r) for r in rows]
        return [c for c in cands if QID_RE.fullmatch(c.qid)]


# -- strategies ---------------------------------------------------------------


def disambiguate_baseline(cands: Sequence[Candidate]) -> str | None:
    if not cands:
        return None
    return min(cands, key=lambda c: c.rank).qid


def disambiguate_case(label: str, profile: RelationProfile, cands: Sequence[Candidate]) -> str | None:
    override = profile.case_overrides.get(label.strip().casefold())
    if override is not None:
        return override
    return disambiguate_baseline(cands)


def disambiguate_keyword(cands: Sequence[Candidate], keywords: Sequence[str]) -> str | None:
    if not keywords:
        raise ValueError("keyword disambiguation needs at least one keyword")
    terms = [k.casefold() for k in keywords]
    for c in sorted(cands, key=lambda c: c.rank):
        desc = c.description.casefold()
        if any(t in desc for t in terms):
            return c.qid
    return disambiguate_baseline(cands)


LM_PROMPT = (
    "{question}\n"
    "The answer \"{label}\" could refer to several Wikidata entities. "
    "Candidates, as QID: {{label: description}}:\n{candidates}\n"
    "Which QID does \"{label}\" refer to here? Reply with the QID only."
)
LM_RETRY = "That is not one of the listed QIDs. Reply with exactly one of: {qids}."


def candidate_dictionary(cands: Sequence[Candidate]) -> str:
    return json.dumps({c.qid: {c.label: c.description} for c in sorted(cands, key=lambda c: c.rank)},
                      ensure_ascii=False, indent=1)


def _pick_qid(reply: str, allowed: set[str]) -> str | None:
    for token in re.findall(r"Q[0-9]+", reply or ""):
        if token in allowed:
            return token
    return None


def disambiguate_lm(query: QueryRecord, object_label: str, cands: Sequence[Candidate],
                    llm: LLMClient, model_name: str, temperature: float = 0.0) -> tuple[str | None, bool]:
    """Ask the model to choose among candidates.

    Returns ``(qid, resolved)``. One corrective retry is made on an invalid
    reply; after that the baseline pick is returned with ``resolved=False``.
    """
    if not cands:
        return None, True
    if len(cands) == 1:
        return cands[0].qid, True
    allowed = {c.qid for c in cands}
    first = LM_PROMPT.format(question=question_text(query.subject_label, query.relation),
                             label=object_label, candidates=candidate_dictionary(cands))
    messages = [("user", first)]
    for attempt in range(2):
        reply = llm.complete(ChatRequest(model_name, tuple(messages), temperature)).text
        qid = _pick_qid(reply, allowed)
        if qid is not None:
            return qid, True
        messages += [("assistant", reply),
                     ("user", LM_RETRY.format(qids=", ".join(c.qid for c in sorted(cands, key=lambda c: c.rank))))]
    logger.warning("LM disambiguation unresolved for %r (%s)", object_label, query.relation)
    return disambiguate_baseline(cands), False


def map_objects(labels: Sequence[str], record: QueryRecord, profile: RelationProfile, *,
                search: WikidataSearch | None = None, llm: LLMClient | None = None,
                model_name: str = "", improved: bool = True) -> list[MappingOutcome]:
    """One outcome per label, order preserved.

    Numeric relations bypass search and emit the normalized number.
    ``improved=False`` forces the baseline strategy for entity relations.
    """
    outcomes = []
    for label in labels:
        if profile.is_numeric:
            value = normalize_number(label)
            outcomes.append(MappingOutcome(label, value, Strategy.none, 0,
                                           None if value is not None else NO_CANDIDATES))
            continue
        strategy = profile.disambiguation if improved else Strategy.baseline
        override = profile.case_overrides.get(label.strip().casefold()) if strategy is Strategy.case else None
        cands = search.search_candidates(label) if search is not None and label.strip() else []
        if override is not None:
            outcomes.append(MappingOutcome(label, override, strategy, len(cands)))
            continue
        if not cands:
            outcomes.append(MappingOutcome(label, None, strategy, 0, NO_CANDIDATES))
            continue
        error = None
        if strategy is Strategy.keyword:
            qid = disambiguate_keyword(cands, profile.keyword_terms)
        elif strategy is Strategy.case:
            qid = disambiguate_case(label, profile, cands)
        elif strategy is Strategy.lm:
            if llm is None:
                raise ValueError("LM disambiguation needs an LLM client")
            qid, ok = disambiguate_lm(record, label, cands, llm, model_name)
            error = None if ok else UNRESOLVED
        else:
            qid = disambiguate_baseline(cands)
        outcomes.append(MappingOutcome(label, qid, strategy, len(cands), error))
    return outcomes
