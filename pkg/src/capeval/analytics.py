"""Worker quality control and system scoring.

Runs as a batch over an immutable snapshot of the assessment store:
per-worker QC gating (paired signed-rank on hidden good/degraded pairs),
repeat-consistency checks, per-worker z-standardization, then caption-first
aggregation into system scores.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import MalformedLineError
from .hitplan import HitPlan
from .stats import signed_rank

log = logging.getLogger(__name__)

SKIP_SENTINEL = -1  # raw_score recorded when an assessor skips a broken video

STATUS_PASSED = "passed"
STATUS_FAILED = "failed"
STATUS_INSUFFICIENT = "insufficient-data"


@dataclass(frozen=True)
class AssessmentRecord:
    worker_id: str
    item_id: str
    raw_score: float  # integer 0-100 at collection time
    timestamp: float


@dataclass
class WorkerProfile:
    worker_id: str
    n_assessments: int
    mean: float
    sd: float
    qc_p_value: float | None
    repeat_p_value: float | None  # None when no repeat pair was completed
    n_qc_pairs: int
    n_repeat_pairs: int
    status: str

    @property
    def passed(self) -> bool:
        return self.status == STATUS_PASSED

    @property
    def repeat_consistent(self) -> bool | None:
        if self.repeat_p_value is None:
            return None
        return self.repeat_p_value >= 0.05


@dataclass(frozen=True)
class SystemScore:
    system_id: str
    raw_avg: float
    z_avg: float
    n: int  # distinct captions assessed


@dataclass
class QcConfig:
    alpha: float = 0.05
    min_pairs: int = 10


# ---------------------------------------------------------------------------
# Assessment store I/O
# ---------------------------------------------------------------------------

def store_line(record: AssessmentRecord) -> str:
    return (
        f"{record.worker_id}\t{record.item_id}\t"
        f"{int(record.raw_score)}\t{record.timestamp:.3f}"
    )


def load_store(path: str) -> tuple[list[AssessmentRecord], int]:
    """Read the append-only store; returns (records, skip_count).

    Skip-sentinel lines (raw_score == -1) are counted but excluded from
    analysis.
    """
    records: list[AssessmentRecord] = []
    skips = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise MalformedLineError(path, line_no, "expected 4 fields")
            worker_id, item_id, score, timestamp = parts
            value = float(score)
            if value == SKIP_SENTINEL:
                skips += 1
                continue
            records.append(AssessmentRecord(worker_id, item_id, value,
                                            float(timestamp)))
    return records, skips


def save_store(records: Iterable[AssessmentRecord], path: str,
               header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(line + "\n")
        for record in records:
            fh.write(store_line(record) + "\n")


# ---------------------------------------------------------------------------
# Per-worker quality control
# ---------------------------------------------------------------------------

def _dedupe(records: Sequence[AssessmentRecord]) -> list[AssessmentRecord]:
    """One record per (worker, item): the earliest by timestamp."""
    best: dict[tuple[str, str], AssessmentRecord] = {}
    for record in records:
        key = (record.worker_id, record.item_id)
        if key not in best or record.timestamp < best[key].timestamp:
            best[key] = record
    return sorted(best.values(), key=lambda r: (r.worker_id, r.timestamp, r.item_id))


def qc_pairs_for(records: Sequence[AssessmentRecord],
                 plan: HitPlan) -> list[tuple[float, float]]:
    """(good score, degraded score) for every completed hidden pair."""
    by_item = {r.item_id: r.raw_score for r in records}
    pairs = []
    for record in records:
        item = plan.item(record.item_id)
        if item.role.kind != "qc-bad":
            continue
        good_score = by_item.get(item.role.pair_item_id)
        if good_score is not None:
            pairs.append((good_score, record.raw_score))
    return pairs


def repeat_pairs_for(records: Sequence[AssessmentRecord],
                     plan: HitPlan) -> list[tuple[float, float]]:
    """(first score, repeat score) for every completed repeat."""
    by_item = {r.item_id: r.raw_score for r in records}
    pairs = []
    for record in records:
        item = plan.item(record.item_id)
        if item.role.kind != "repeat":
            continue
        first = by_item.get(item.role.repeat_of)
        if first is not None:
            pairs.append((first, record.raw_score))
    return pairs


def repeat_consistency(records: Sequence[AssessmentRecord],
                       plan: HitPlan) -> tuple[float | None, int]:
    """Two-sided signed-rank p on (first, repeat) scores.

    All-zero differences mean maximal consistency (p = 1); no completed
    repeats mean not-applicable (None).
    """
    pairs = repeat_pairs_for(_dedupe(records), plan)
    if not pairs:
        return None, 0
    result = signed_rank(pairs)
    if result.degenerate:
        return 1.0, len(pairs)
    return result.p_two_sided, len(pairs)


def worker_qc(records: Sequence[AssessmentRecord], plan: HitPlan,
              config: QcConfig | None = None) -> WorkerProfile:
    """Gate one worker on their hidden quality-control pairs.

    One-sided signed-rank of H1 score(good) > score(degraded); a worker
    with no nonzero difference cannot demonstrate separation and fails.
    """
    config = config or QcConfig()
    records = _dedupe(records)
    if not records:
        raise ValueError("no records for worker")
    worker_id = records[0].worker_id
    scores = [r.raw_score for r in records]
    mean = sum(scores) / len(scores)
    sd = math.sqrt(sum((s - mean) ** 2 for s in scores) / len(scores))

    pairs = qc_pairs_for(records, plan)
    repeat_p, n_repeats = repeat_consistency(records, plan)

    qc_p: float | None = None
    if pairs:
        result = signed_rank(pairs)
        qc_p = 1.0 if result.degenerate else result.p_greater

    if len(pairs) < config.min_pairs:
        status = STATUS_INSUFFICIENT
    elif qc_p is not None and qc_p < config.alpha:
        status = STATUS_PASSED
    else:
        status = STATUS_FAILED

    return WorkerProfile(
        worker_id=worker_id,
        n_assessments=len(records),
        mean=mean,
        sd=sd,
        qc_p_value=qc_p,
        repeat_p_value=repeat_p,
        n_qc_pairs=len(pairs),
        n_repeat_pairs=n_repeats,
        status=status,
    )


def profile_workers(records: Sequence[AssessmentRecord], plan: HitPlan,
                    config: QcConfig | None = None) -> dict[str, WorkerProfile]:
    by_worker: dict[str, list[AssessmentRecord]] = {}
    for record in records:
        by_worker.setdefault(record.worker_id, []).append(record)
    return {
        worker_id: worker_qc(worker_records, plan, config)
        for worker_id, worker_records in sorted(by_worker.items())
    }


# ---------------------------------------------------------------------------
# Standardization and aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZRecord:
    worker_id: str
    item_id: str
    raw_score: float
    z_score: float


def standardize(records: Sequence[AssessmentRecord],
                profiles: dict[str, WorkerProfile]) -> tuple[list[ZRecord], list[str]]:
    """z-score every record of a passed worker by that worker's overall
    mean and standard deviation; zero-sd workers are excluded with a
    diagnostic."""
    excluded = sorted(
        p.worker_id for p in profiles.values() if p.passed and p.sd == 0.0
    )
    for worker_id in excluded:
        log.warning("worker %s has zero score variance; excluded from "
                    "standardization", worker_id)
    out = []
    for record in _dedupe(records):
        profile = profiles.get(record.worker_id)
        if profile is None or not profile.passed or profile.sd == 0.0:
            continue
        out.append(ZRecord(
            worker_id=record.worker_id,
            item_id=record.item_id,
            raw_score=record.raw_score,
            z_score=(record.raw_score - profile.mean) / profile.sd,
        ))
    return out, excluded


@dataclass
class CaptionTable:
    """Per-system per-caption mean raw and z scores (caption-first stage).

    `counts` carries the assessment count behind each caption mean, so
    operators can see coverage and schedule recollection where it is thin.
    """

    raw: dict[str, dict[str, float]]
    z: dict[str, dict[str, float]]
    counts: dict[str, dict[str, int]]

    def z_samples(self) -> dict[str, list[float]]:
        return {
            system: [self.z[system][cid] for cid in sorted(self.z[system])]
            for system in self.z
        }

    def coverage_tsv(self) -> str:
        lines = ["system\tcaption_id\tn_assessments\tmean_raw\tmean_z"]
        for system in sorted(self.counts):
            for cid in sorted(self.counts[system]):
                lines.append(
                    f"{system}\t{cid}\t{self.counts[system][cid]}\t"
                    f"{self.raw[system][cid]:.3f}\t{self.z[system][cid]:.4f}"
                )
        return "\n".join(lines) + "\n"


def caption_table(z_records: Sequence[ZRecord], plan: HitPlan) -> CaptionTable:
    raw_sums: dict[str, dict[str, list[float]]] = {}
    z_sums: dict[str, dict[str, list[float]]] = {}
    for record in z_records:
        _, system_id, caption_id = plan.resolve(record.item_id)
        raw_sums.setdefault(system_id, {}).setdefault(caption_id, []).append(
            record.raw_score)
        z_sums.setdefault(system_id, {}).setdefault(caption_id, []).append(
            record.z_score)
    return CaptionTable(
        raw={
            system: {cid: sum(v) / len(v) for cid, v in captions.items()}
            for system, captions in raw_sums.items()
        },
        z={
            system: {cid: sum(v) / len(v) for cid, v in captions.items()}
            for system, captions in z_sums.items()
        },
        counts={
            system: {cid: len(v) for cid, v in captions.items()}
            for system, captions in raw_sums.items()
        },
    )


def system_scores(z_records: Sequence[ZRecord],
                  plan: HitPlan) -> list[SystemScore]:
    """Two-stage mean: per caption first, then per system, raw and z."""
    table = caption_table(z_records, plan)
    scores = []
    for system in sorted(table.raw):
        captions = table.raw[system]
        if not captions:
            log.warning("system %s has no assessed captions; omitted", system)
            continue
        raw_avg = sum(captions.values()) / len(captions)
        z_values = table.z[system]
        z_avg = sum(z_values.values()) / len(z_values)
        scores.append(SystemScore(system_id=system, raw_avg=raw_avg,
                                  z_avg=z_avg, n=len(captions)))
    scores.sort(key=lambda s: -s.z_avg)
    return scores


@dataclass
class EvaluationResult:
    profiles: dict[str, WorkerProfile]
    scores: list[SystemScore]
    table: CaptionTable
    excluded_workers: list[str]
    n_records: int

    def score_of(self, system_id: str) -> SystemScore:
        for score in self.scores:
            if score.system_id == system_id:
                return score
        raise KeyError(system_id)


def evaluate(records: Sequence[AssessmentRecord], plan: HitPlan,
             config: QcConfig | None = None) -> EvaluationResult:
    """The full analytics batch: QC gate, standardize, aggregate."""
    profiles = profile_workers(records, plan, config)
    z_records, excluded = standardize(records, profiles)
    table = caption_table(z_records, plan)
    return EvaluationResult(
        profiles=profiles,
        scores=system_scores(z_records, plan),
        table=table,
        excluded_workers=excluded,
        n_records=len(records),
    )


def worker_report_tsv(profiles: dict[str, WorkerProfile]) -> str:
    lines = ["worker_id\tn\tmean\tsd\tqc_pairs\tqc_p\trepeat_pairs\trepeat_p\tstatus"]
    for worker_id in sorted(profiles):
        p = profiles[worker_id]
        qc_p = "n/a" if p.qc_p_value is None else f"{p.qc_p_value:.6g}"
        rep_p = "n/a" if p.repeat_p_value is None else f"{p.repeat_p_value:.6g}"
        lines.append(
            f"{p.worker_id}\t{p.n_assessments}\t{p.mean:.3f}\t{p.sd:.3f}\t"
            f"{p.n_qc_pairs}\t{qc_p}\t{p.n_repeat_pairs}\t{rep_p}\t{p.status}"
        )
    return "\n".join(lines) + "\n"


def leaderboard_tsv(scores: Sequence[SystemScore]) -> str:
    lines = ["system\traw_avg\tz_avg\tn"]
    for score in scores:
        lines.append(
            f"{score.system_id}\t{score.raw_avg:.3f}\t{score.z_avg:.4f}\t{score.n}"
        )
    return "\n".join(lines) + "\n"


def load_leaderboard_tsv(path: str) -> list[SystemScore]:
    scores = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith(("#", "system\t")):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise MalformedLineError(path, line_no, "expected 4 fields")
            scores.append(SystemScore(parts[0], float(parts[1]),
                                      float(parts[2]), int(parts[3])))
    return scores
