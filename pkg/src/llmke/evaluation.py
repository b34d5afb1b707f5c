"""Per-row and macro-averaged precision / recall / F1 over object ID sets."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from statistics import fmean
from typing import Iterable, Sequence

from .dataset import QID_RE, GroundTruthRecord, RelationId, normalize_number

logger = logging.getLogger(__name__)


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class RowScore:
    precision: float
    recall: float
    f1: float
    is_zero_object_truth: bool = False


@dataclass(frozen=True)
class PRF:
    p: float
    r: float
    f1: float
    rows: int = 0

    def to_dict(self) -> dict:
        return {"p": self.p, "r": self.r, "f1": self.f1, "rows": self.rows}


@dataclass
class EvaluationReport:
    per_relation: dict[str, PRF]
    zero_object_row: PRF | None
    overall: PRF
    mode: str = "id"
    missing_predictions: int = field(default=0)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "per_relation": {k: v.to_dict() for k, v in sorted(self.per_relation.items())},
            "zero_object_row": self.zero_object_row.to_dict() if self.zero_object_row else None,
            "overall": self.overall.to_dict(),
            "missing_predictions": self.missing_predictions,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        def prf(x):
            return PRF(x["p"], x["r"], x["f1"], x.get("rows", 0))

        return cls(
            {k: prf(v) for k, v in d["per_relation"].items()},
            prf(d["zero_object_row"]) if d.get("zero_object_row") else None,
            prf(d["overall"]),
            d.get("mode", "id"),
            d.get("missing_predictions", 0),
        )

    def to_text(self) -> str:
        width = max([len("Zero-object cases")] + [len(k) for k in self.per_relation])
        lines = [f"{'Relation':<{width}}  {'P':>6}  {'R':>6}  {'F1':>6}  {'Rows':>5}"]
        lines.append("-" * len(lines[0]))
        for name in sorted(self.per_relation):
            s = self.per_relation[name]
            lines.append(f"{name:<{width}}  {s.p:6.4f}  {s.r:6.4f}  {s.f1:6.4f}  {s.rows:5d}")
        lines.append("-" * len(lines[0]))
        if self.zero_object_row is not None:
            z = self.zero_object_row
            lines.append(f"{'Zero-object cases':<{width}}  {z.p:6.4f}  {z.r:6.4f}  {z.f1:6.4f}  {z.rows:5d}")
        o = self.overall
        lines.append(f"{'Average':<{width}}  {o.p:6.4f}  {o.r:6.4f}  {o.f1:6.4f}  {o.rows:5d}")
        return "\n".join(lines) + "\n"


def row_scores(pred_ids: Iterable[str], truth_ids: Iterable[str]) -> RowScore:
    """Set-overlap scores for one row.

    Both empty scores 1/1/1; exactly one side empty scores 0/0/0.
    """
    pred, truth = set(pred_ids), set(truth_ids)
    if not pred and not truth:
        return RowScore(1.0, 1.0, 1.0, True)
    if not pred or not truth:
        return RowScore(0.0, 0.0, 0.0, not truth)
    hits = len(pred & truth)
    p = hits / len(pred)
    r = hits / len(truth)
    # same value as the harmonic mean of p and r, but one rounding step instead of several
    return RowScore(p, r, 2 * hits / (len(pred) + len(truth)), False)


def relation_macro(rows: Sequence[RowScore]) -> PRF:
    if not rows:
        raise EvaluationError("cannot average an empty set of rows")
    return PRF(fmean(x.precision for x in rows), fmean(x.recall for x in rows),
               fmean(x.f1 for x in rows), len(rows))


def normalize_id(value: str) -> str:
    v = str(value).strip()
    if QID_RE.fullmatch(v.upper()):
        return v.upper()
    num = normalize_number(v) if v and v.replace(",", "").strip().isdigit() else None
    return num if num is not None else v


def id_set(ids: Iterable[str]) -> set[str]:
    return {normalize_id(i) for i in ids if i is not None and str(i).strip()}


def _label_set(labels: Iterable[str]) -> set[str]:
    return {str(x).strip().casefold() for x in labels if x is not None and str(x).strip()}


def _keyed(rows, what: str) -> dict:
    out = {}
    for r in rows:
        key = (r.subject_qid, RelationId.parse(r.relation))
        if key in out:
            raise EvaluationError(f"duplicate {what} row for {key[0]} / {key[1]}")
        out[key] = r
    return out


def overall_report(preds: Sequence, truth: Sequence[GroundTruthRecord], mode: str = "id") -> EvaluationReport:
    """Score predictions against truth.

    ``preds`` items need ``subject_qid``, ``relation``, ``object_ids`` and
    ``object_labels``. Rows missing from ``preds`` count as empty
    predictions. ``mode="label"`` compares case-folded labels instead of IDs.
    """
    pred_by_key = _keyed(preds, "prediction")
    truth_by_key = _keyed(truth, "ground truth")
    extra = set(pred_by_key) - set(truth_by_key)
    if extra:
        logger.warning("%d predictions have no ground truth row and are ignored", len(extra))
    by_rel: dict[str, list[RowScore]] = {}
    zero: list[RowScore] = []
    missing = 0
    for key, t in truth_by_key.items():
        p = pred_by_key.get(key)
        if p is None:
            missing += 1
        if mode == "label":
            ps = _label_set(p.object_labels) if p else set()
            ts = _label_set(t.object_labels)
        else:
            ps = id_set(p.object_ids) if p else set()
            ts = id_set(t.object_ids)
        s = row_scores(ps, ts)
        by_rel.setdefault(key[1].value, []).append(s)
        if not ts:
            zero.append(s)
    if missing:
        logger.warning("%d ground-truth rows have no prediction; scored as empty", missing)
    if not by_rel:
        raise EvaluationError("no ground-truth rows to score")
    per_relation = {rel: relation_macro(rows) for rel, rows in sorted(by_rel.items())}
    rel_rows = list(per_relation.values())
    overall = PRF(fmean(x.p for x in rel_rows), fmean(x.r for x in rel_rows),
                  fmean(x.f1 for x in rel_rows), sum(x.rows for x in rel_rows))
    zero_row = relation_macro(zero) if zero else None
    return EvaluationReport(per_relation, zero_row, overall, mode, missing)
