"""End-to-end run orchestration, run manifests, and report comparison."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import threading
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata, resources
from pathlib import Path
from typing import Sequence

from .context import DEFAULT_BUDGET, ImdbSnapshot, WikipediaClient, assemble_context
from .dataset import (QueryRecord, RelationId, load_records, relation_profile,
                      write_jsonl)
from .entity_mapping import SEARCH_LIMIT, MappingOutcome, WikidataSearch, map_objects
from .evaluation import EvaluationReport, overall_report
from .http import HostPacer, LookupStore, MissingFixtureError
from .llm_client import (DEFAULT_BASE_URL, DEFAULT_KEY_ENV, ChatRequest, FixtureStore, LiveProvider,
                         LLMClient, ReplayProvider)
from .prompting import (ParseFailure, PromptSetting, build_context_followup_prompt,
                        build_question_prompt, build_triple_prompt, normalize_numeric_labels,
                        parse_object_list, select_few_shot, templates_checksum)

logger = logging.getLogger(__name__)

LLM_FIXTURES = "llm.jsonl"
LOOKUP_FIXTURES = "lookups.jsonl"
IMDB_FIXTURES = "imdb.jsonl"


class RunAborted(RuntimeError):
    pass


@dataclass
class RunConfig:
    input_path: str
    output_dir: str
    train_path: str
    model_name: str = "gpt-4"
    setting: PromptSetting = PromptSetting.question
    disambiguation_mode: str = "improved"  # or "baseline"
    provider: str = "replay"  # or "live"
    fixture_dir: str | None = None
    cache_dir: str | None = None
    truth_path: str | None = None
    parallelism: int = 4
    context_budget: int = DEFAULT_BUDGET
    few_shot_k: int = 3
    temperature: float = 0.0
    max_output_tokens: int = 512
    system_prompt: str | None = None
    search_limit: int = SEARCH_LIMIT
    base_url: str = DEFAULT_BASE_URL
    key_env: str = DEFAULT_KEY_ENV
    record: bool = False  # live runs: also write replies/lookups into fixture_dir

    def __post_init__(self):
        self.setting = PromptSetting(self.setting)
        if self.disambiguation_mode not in ("baseline", "improved"):
            raise ValueError(f"disambiguation_mode must be baseline or improved, not {self.disambiguation_mode!r}")
        if self.provider not in ("live", "replay"):
            raise ValueError(f"provider must be live or replay, not {self.provider!r}")
        if self.provider == "replay" and not self.fixture_dir:
            raise ValueError("replay runs need a fixture directory")
        if self.record and not self.fixture_dir:
            raise ValueError("recording needs a fixture directory")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    @property
    def improved(self) -> bool:
        return self.disambiguation_mode == "improved"

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["setting"] = self.setting.value
        return d


@dataclass
class PredictionRecord:
    subject_label: str
    subject_qid: str
    relation: RelationId
    object_labels: list[str]
    object_ids: list[str]
    setting: PromptSetting
    raw_model_text: str = ""
    raw_first_step_text: str | None = None
    mapping_outcomes: list[MappingOutcome] = field(default_factory=list)
    parse_failed: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        d = {
            "SubjectEntity": self.subject_label,
            "SubjectEntityID": self.subject_qid,
            "Relation": self.relation.value,
            "ObjectEntities": list(self.object_labels),
            "ObjectEntitiesID": list(self.object_ids),
            "Setting": self.setting.value,
            "RawModelText": self.raw_model_text,
        }
        if self.raw_first_step_text is not None:
            d["RawFirstStepText"] = self.raw_first_step_text
        d["MappingOutcomes"] = [m.to_dict() for m in self.mapping_outcomes]
        d["ParseFailed"] = self.parse_failed
        d["Error"] = self.error
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PredictionRecord":
        from .dataset import Strategy

        outcomes = [MappingOutcome(m["label"], m.get("qid"), Strategy(m["strategy"]),
                                   m.get("candidates", 0), m.get("error"))
                    for m in d.get("MappingOutcomes", [])]
        labels = list(d.get("ObjectEntities") or [])
        ids = list(d.get("ObjectEntitiesID") or [])
        if labels == [""]:
            labels = []
        if ids == [""] and not labels:
            ids = []
        return cls(d["SubjectEntity"], d["SubjectEntityID"], RelationId.parse(d["Relation"]),
                   labels, ids, PromptSetting(d.get("Setting", "question")),
                   d.get("RawModelText", ""), d.get("RawFirstStepText"), outcomes,
                   d.get("ParseFailed", False), d.get("Error"))


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(PredictionRecord.from_dict(json.loads(line)))
    return out


@dataclass
class Services:
    """External capabilities a run depends on; tests may inject their own."""

    llm: LLMClient
    search: WikidataSearch
    wiki: WikipediaClient
    imdb: ImdbSnapshot
    lookups: LookupStore


def build_services(config: RunConfig) -> Services:
    fixture_dir = Path(config.fixture_dir) if config.fixture_dir else None
    cache_dir = Path(config.cache_dir) if config.cache_dir else None
    pacer = HostPacer(min_interval=0.1)
    cache = FixtureStore(cache_dir / LLM_FIXTURES) if cache_dir else None
    if config.provider == "replay":
        provider = ReplayProvider(FixtureStore(fixture_dir / LLM_FIXTURES))
        lookups = LookupStore(None, offline=True, extra_paths=(fixture_dir / LOOKUP_FIXTURES,))
        recorder = None
    else:
        provider = LiveProvider(config.base_url, key_env=config.key_env)
        if config.record:
            lookups = LookupStore(fixture_dir / LOOKUP_FIXTURES,
                                  extra_paths=((cache_dir / LOOKUP_FIXTURES,) if cache_dir else ()))
            recorder = FixtureStore(fixture_dir / LLM_FIXTURES)
        else:
            lookups = LookupStore(cache_dir / LOOKUP_FIXTURES if cache_dir else None)
            recorder = None
    imdb = ImdbSnapshot(fixture_dir / IMDB_FIXTURES if fixture_dir else None)
    return Services(
        llm=LLMClient(provider, cache=cache, recorder=recorder, max_in_flight=config.parallelism),
        search=WikidataSearch(lookups, limit=config.search_limit, pacer=pacer),
        wiki=WikipediaClient(lookups, pacer=pacer),
        imdb=imdb,
        lookups=lookups,
    )


class _Timer:
    def __init__(self):
        self.totals: dict[str, float] = defaultdict(float)
        self._lock = threading.Lock()

    def add(self, stage: str, seconds: float) -> None:
        with self._lock:
            self.totals[stage] += seconds


def _ask(services: Services, config: RunConfig, prompt) -> str:
    req = ChatRequest(config.model_name, prompt.messages, config.temperature, config.max_output_tokens)
    return services.llm.complete(req).text


def predict_row(record: QueryRecord, examples, config: RunConfig, services: Services,
                timer: _Timer | None = None, notes: dict | None = None) -> PredictionRecord:
    """Probe, parse and link one query row."""
    timer = timer or _Timer()
    profile = relation_profile(record.relation)
    first_text = None
    t0 = time.perf_counter()
    if config.setting is PromptSetting.triple:
        reply = _ask(services, config, build_triple_prompt(record, examples, config.system_prompt))
        timer.add("probe", time.perf_counter() - t0)
    else:
        reply = _ask(services, config, build_question_prompt(record, examples, config.system_prompt))
        timer.add("probe", time.perf_counter() - t0)
        if config.setting is PromptSetting.context:
            t1 = time.perf_counter()
            bundle = assemble_context(record, profile, services.wiki, services.imdb, config.context_budget)
            timer.add("context", time.perf_counter() - t1)
            if notes is not None:
                notes["context_titles"] = list(bundle.source_titles)
                notes["context_truncated"] = bundle.truncated
                notes["context_text"] = bundle.render()
            first_text = reply
            t2 = time.perf_counter()
            followup = build_context_followup_prompt(record, bundle.render(), first_text, examples,
                                                     config.system_prompt)
            reply = _ask(services, config, followup)
            timer.add("probe", time.perf_counter() - t2)
    labels = parse_object_list(reply)
    parse_failed = isinstance(labels, ParseFailure)
    if parse_failed:
        logger.warning("no list in reply for %s / %s: %r", record.subject_qid, record.relation, reply[:80])
    if profile.is_numeric:
        labels = normalize_numeric_labels(labels)
    t3 = time.perf_counter()
    outcomes = map_objects(labels, record, profile, search=services.search, llm=services.llm,
                           model_name=config.model_name, improved=config.improved)
    timer.add("mapping", time.perf_counter() - t3)
    return PredictionRecord(
        record.subject_label, record.subject_qid, record.relation,
        [o.object_label for o in outcomes], [o.resolved_qid or "" for o in outcomes],
        config.setting, reply, first_text, outcomes, parse_failed,
    )


def _sha256_file(path: Path) -> str | None:
    if not path.exists():
        return None
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _relations_checksum() -> str:
    raw = resources.files("llmke.data").joinpath("relations.yaml").read_bytes()
    return hashlib.sha256(raw).hexdigest()


@dataclass
class RunResult:
    predictions: list[PredictionRecord]
    report: EvaluationReport | None
    manifest: dict
    predictions_path: Path


def run(config: RunConfig, services: Services | None = None) -> RunResult:
    started = time.perf_counter()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timer = _Timer()
    t = time.perf_counter()
    records = load_records(config.input_path)
    train = load_records(config.train_path, expect_truth=True)
    truth = load_records(config.truth_path, expect_truth=True) if config.truth_path else None
    timer.add("load", time.perf_counter() - t)
    services = services or build_services(config)

    shots = {}
    for rel in sorted({r.relation for r in records}, key=lambda r: r.value):
        shots[rel] = select_few_shot(train, rel, config.few_shot_k)

    results: list[PredictionRecord | None] = [None] * len(records)
    notes: list[dict] = [{} for _ in records]
    errors = []

    def work(i: int) -> None:
        rec = records[i]
        try:
            results[i] = predict_row(rec, shots[rec.relation], config, services, timer, notes[i])
        except MissingFixtureError as e:
            raise RunAborted(f"row {i + 1} ({rec.subject_qid} / {rec.relation}): {e}") from e
        except Exception as e:
            if config.provider == "replay":
                raise RunAborted(f"row {i + 1} ({rec.subject_qid} / {rec.relation}): {e}") from e
            logger.error("row %d (%s / %s) failed: %s", i + 1, rec.subject_qid, rec.relation, e)
            errors.append({"row": i + 1, "subject": rec.subject_qid, "relation": rec.relation.value,
                           "error": f"{type(e).__name__}: {e}"})
            results[i] = PredictionRecord(rec.subject_label, rec.subject_qid, rec.relation, [], [],
                                          config.setting, error=f"{type(e).__name__}: {e}")

    with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
        futures = [pool.submit(work, i) for i in range(len(records))]
        for f in futures:
            f.result()

    predictions = [r for r in results if r is not None]
    predictions_path = out_dir / "predictions.jsonl"
    t = time.perf_counter()
    write_jsonl(predictions_path, (p.to_dict() for p in predictions))
    if config.setting is PromptSetting.context:
        write_jsonl(out_dir / "contexts.jsonl", (
            {"SubjectEntityID": p.subject_qid, "Relation": p.relation.value,
             "Sources": n.get("context_titles", []), "Context": n.get("context_text", "")}
            for p, n in zip(predictions, notes)))
    report = None
    if truth is not None:
        report = overall_report(predictions, truth)
        (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
        (out_dir / "report.txt").write_text(report.to_text(), encoding="utf-8")
    timer.add("write", time.perf_counter() - t)

    fixture_dir = Path(config.fixture_dir) if config.fixture_dir else None
    manifest = {
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "package_version": _version(),
        "config": config.to_dict(),
        "templates_sha256": templates_checksum(),
        "relations_sha256": _relations_checksum(),
        "input_sha256": _sha256_file(Path(config.input_path)),
        "train_sha256": _sha256_file(Path(config.train_path)),
        "fixture_files": {name: _sha256_file(fixture_dir / name) for name in
                          (LLM_FIXTURES, LOOKUP_FIXTURES, IMDB_FIXTURES)} if fixture_dir else {},
        "llm_digests": services.llm.used_digests(),
        "rows": len(predictions),
        "parse_failures": sum(p.parse_failed for p in predictions),
        "row_errors": errors,
        "context_fetches": [
            {"SubjectEntityID": p.subject_qid, "Relation": p.relation.value, "titles": n["context_titles"],
             "truncated": n["context_truncated"]}
            for p, n in zip(predictions, notes) if "context_titles" in n
        ],
        "timings_s": {k: round(v, 4) for k, v in sorted(timer.totals.items())},
        "wall_time_s": round(time.perf_counter() - started, 4),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n",
                                           encoding="utf-8")
    return RunResult(predictions, report, manifest, predictions_path)


def config_from_manifest(path: str | Path, **overrides) -> RunConfig:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    cfg = {**doc["config"], **{k: v for k, v in overrides.items() if v is not None}}
    return RunConfig(**cfg)


def _version() -> str:
    try:
        return metadata.version("llmke")
    except metadata.PackageNotFoundError:
        return "unknown"


# -- comparison ---------------------------------------------------------------


@dataclass(frozen=True)
class DeltaRow:
    relation: str
    f1_a: float
    f1_b: float

    @property
    def delta(self) -> float:
        return self.f1_b - self.f1_a


def compare_runs(report_a: EvaluationReport, report_b: EvaluationReport) -> list[DeltaRow]:
    """Signed F1 change (b minus a) per relation, with the overall row last."""
    a, b = report_a.per_relation, report_b.per_relation
    if set(a) != set(b):
        raise ValueError(f"reports cover different relations: {sorted(set(a) ^ set(b))}")
    for rel in a:
        if a[rel].rows != b[rel].rows:
            raise ValueError(f"{rel}: reports scored {a[rel].rows} vs {b[rel].rows} rows")
    rows = [DeltaRow(rel, a[rel].f1, b[rel].f1) for rel in sorted(a)]
    rows.append(DeltaRow("Average", report_a.overall.f1, report_b.overall.f1))
    return rows


def format_comparison(rows: Sequence[DeltaRow], label_a: str = "A", label_b: str = "B") -> str:
    width = max(len(r.relation) for r in rows)
    head = f"{'Relation':<{width}}  {label_a:>8}  {label_b:>8}  {'dF1':>8}"
    lines = [head, "-" * len(head)]
    for r in rows:
        if r.relation == "Average":
            lines.append("-" * len(head))
        lines.append(f"{r.relation:<{width}}  {r.f1_a:8.4f}  {r.f1_b:8.4f}  {r.delta:+8.4f}")
    return "\n".join(lines) + "\n"
