"""Simulated assessor populations.

Gives the QC gate, scoring pipeline, and replication analysis a ground
truth that real crowd data cannot provide: per-caption latent qualities
are known, so ranking recovery and gate power are measurable. Outputs use
the real assessment-record type, so the analytics path is exercised
unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .analytics import AssessmentRecord, QcConfig, worker_qc
from .corpus import Caption
from .degradation import DegradedCaption
from .errors import CapevalError
from .hitplan import DisplayItem, Hit, HitConfig, HitPlan, ItemRole
from .rngutil import substream

KINDS = ("diligent", "random-uniform", "constant", "adversarial-inverted")


@dataclass(frozen=True)
class WorkerModel:
    kind: str
    noise_sd: float = 10.0   # diligent: rating noise
    scale: float = 1.0       # diligent: personal scale a
    bias: float = 0.0        # diligent: personal bias b
    constant: float = 50.0   # constant worker's fixed answer

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CapevalError(f"unknown worker kind {self.kind!r}")

    def score(self, quality: float, rng) -> int:
        if self.kind == "diligent":
            raw = self.scale * quality + self.bias + rng.normal(0.0, self.noise_sd)
        elif self.kind == "random-uniform":
            return int(rng.integers(0, 101))
        elif self.kind == "constant":
            raw = self.constant
        else:  # adversarial-inverted
            raw = 100.0 - quality
        return int(min(100, max(0, round(raw))))


@dataclass
class LatentConfig:
    system_means: dict[str, float] = field(default_factory=dict)
    default_system_mean: float = 50.0
    system_sd: float = 10.0
    qc_good_low: float = 65.0
    qc_good_high: float = 95.0
    degradation_penalty: float = 30.0


@dataclass
class LatentQuality:
    """Latent quality q in [0, 100] per caption_id."""

    values: dict[str, float]

    def of(self, caption_id: str) -> float:
        return self.values[caption_id]

    @classmethod
    def from_plan(cls, plan: HitPlan, config: LatentConfig,
                  seed: int) -> "LatentQuality":
        values: dict[str, float] = {}
        # draws keyed by caption id, so plan iteration order is irrelevant
        for hit in plan.hits:
            for item in hit.items:
                if item.caption_id in values or item.role.kind == "repeat":
                    continue
                rng = substream(seed, f"latent:{item.caption_id}")
                if item.role.kind == "system":
                    mean = config.system_means.get(
                        item.role.run_id, config.default_system_mean)
                    q = rng.normal(mean, config.system_sd)
                elif item.role.kind == "qc-good":
                    q = rng.uniform(config.qc_good_low, config.qc_good_high)
                else:  # qc-bad: derived from its paired good caption
                    good = plan.item(item.role.pair_item_id)
                    if good.caption_id not in values:
                        good_rng = substream(seed, f"latent:{good.caption_id}")
                        values[good.caption_id] = float(min(100, max(0, good_rng.uniform(
                            config.qc_good_low, config.qc_good_high))))
                    q = values[good.caption_id] - config.degradation_penalty
                values[item.caption_id] = float(min(100.0, max(0.0, q)))
        return cls(values=values)


def simulate_assessments(plan: HitPlan, population: Sequence[WorkerModel],
                         latent: LatentQuality, seed: int) -> list[AssessmentRecord]:
    """Every worker fully answers one HIT (worker i takes HIT i mod #hits).

    Deterministic under (plan, population, latent, seed); each worker owns
    a derived generator substream.
    """
    if not population:
        raise CapevalError("population is empty")
    records: list[AssessmentRecord] = []
    timestamp = 0.0
    for index, model in enumerate(population):
        worker_id = f"{model.kind}-{index:04d}"
        rng = substream(seed, f"worker:{index}")
        hit = plan.hits[index % len(plan.hits)]
        for item in hit.items:
            score = model.score(latent.of(item.caption_id), rng)
            timestamp += 1.0
            records.append(AssessmentRecord(worker_id, item.item_id,
                                            float(score), timestamp))
    return records


# ---------------------------------------------------------------------------
# QC gate power measurement
# ---------------------------------------------------------------------------

def _probe_plan(pairs: int, fillers: int = 5) -> HitPlan:
    """Minimal one-HIT plan: `pairs` hidden QC pairs plus filler items."""
    items: list[DisplayItem] = []
    counter = 0

    def new_id() -> str:
        nonlocal counter
        counter += 1
        return f"probe-{counter:03d}"

    for i in range(fillers):
        items.append(DisplayItem(
            item_id=new_id(), video_id=f"fv{i}",
            caption_id=f"system:probe:fv{i}", text=f"filler caption {i}",
            role=ItemRole(kind="system", run_id="probe"),
        ))
    for i in range(pairs):
        good = DisplayItem(
            item_id=new_id(), video_id=f"qv{i}",
            caption_id=f"human-A:qv{i}", text=f"good caption {i}",
            role=ItemRole(kind="qc-good", source="human-A"),
        )
        bad = DisplayItem(
            item_id=new_id(), video_id=f"qv{i}",
            caption_id=f"degraded:human-A:qv{i}", text=f"degraded caption {i}",
            role=ItemRole(kind="qc-bad", source="human-A",
                          pair_item_id=good.item_id),
        )
        items.extend([good, bad])
    config = HitConfig(hit_size=len(items), qc_pairs=pairs, repeats=0)
    return HitPlan(hits=[Hit(hit_id="probe-hit", items=items)], seed=0,
                   config=config)


@dataclass
class PowerReport:
    pass_rate: dict[str, float]
    trials: int
    pairs: int
    qc_config: QcConfig
    latent: LatentConfig

    def to_tsv(self) -> str:
        lines = ["worker_kind\tpass_rate"]
        for kind in sorted(self.pass_rate):
            lines.append(f"{kind}\t{self.pass_rate[kind]:.4f}")
        return "\n".join(lines) + "\n"


def qc_power_report(population: Sequence[WorkerModel], pairs: int = 10,
                    trials: int = 1000, seed: int = 0,
                    qc_config: QcConfig | None = None,
                    latent_config: LatentConfig | None = None) -> PowerReport:
    """Empirical pass rate of each worker kind under the analytics QC gate.

    Each trial draws fresh latent qualities and a fresh worker of the given
    kind answering one probe HIT.
    """
    if trials < 100:
        raise CapevalError("need >= 100 trials for a stable estimate")
    qc_config = qc_config or QcConfig(min_pairs=min(10, pairs))
    latent_config = latent_config or LatentConfig()
    plan = _probe_plan(pairs)
    rates: dict[str, float] = {}
    for model in population:
        passes = 0
        for trial in range(trials):
            latent = LatentQuality.from_plan(
                plan, latent_config, seed=hash_mix(seed, model.kind, trial))
            rng = substream(seed, f"power:{model.kind}:{trial}")
            records = []
            for t, item in enumerate(plan.hits[0].items):
                score = model.score(latent.of(item.caption_id), rng)
                records.append(AssessmentRecord(
                    f"{model.kind}-{trial}", item.item_id, float(score),
                    float(t)))
            profile = worker_qc(records, plan, qc_config)
            passes += profile.passed
        rates[model.kind] = passes / trials
    return PowerReport(pass_rate=rates, trials=trials, pairs=pairs,
                       qc_config=qc_config, latent=latent_config)


def hash_mix(seed: int, kind: str, trial: int) -> int:
    # stable per-trial sub-seed for latent redraws
    from .rngutil import stable_hash
    return (seed * 100003 + stable_hash(f"{kind}:{trial}")) % (2 ** 63)


# ---------------------------------------------------------------------------
# Simulation configs and synthetic fixtures
# ---------------------------------------------------------------------------

def expand_population(spec: list[dict]) -> list[WorkerModel]:
    """[{kind, count, ...params}] -> flat list of worker models."""
    population: list[WorkerModel] = []
    for entry in spec:
        entry = dict(entry)
        count = int(entry.pop("count", 1))
        kind = entry.pop("kind")
        fields_ = {k: v for k, v in entry.items()
                   if k in ("noise_sd", "scale", "bias", "constant")}
        population.extend(WorkerModel(kind=kind, **fields_) for _ in range(count))
    return population


def load_sim_config(path: str) -> tuple[list[WorkerModel], LatentConfig, int]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    population = expand_population(data["population"])
    latent_data = data.get("latent", {})
    latent = LatentConfig(
        system_means=dict(latent_data.get("system_means", {})),
        default_system_mean=latent_data.get("default_system_mean", 50.0),
        system_sd=latent_data.get("system_sd", 10.0),
        qc_good_low=latent_data.get("qc_good_low", 65.0),
        qc_good_high=latent_data.get("qc_good_high", 95.0),
        degradation_penalty=latent_data.get("degradation_penalty", 30.0),
    )
    return population, latent, int(data.get("seed", 0))


def synthetic_degraded_pairs(count: int, video_prefix: str = "qv") -> list[
        tuple[Caption, DegradedCaption]]:
    """Plain synthetic QC pairs for simulations without a real corpus."""
    pairs = []
    for i in range(count):
        origin = Caption(
            f"human-A:{video_prefix}{i:04d}", f"{video_prefix}{i:04d}",
            f"a person calmly does activity number {i} outdoors", "human-A")
        bad = DegradedCaption(
            caption_id=f"degraded:{origin.caption_id}",
            origin_caption_id=origin.caption_id,
            donor_caption_id=f"human-A:{video_prefix}{(i + 1) % count:04d}",
            video_id=origin.video_id,
            span_start=2, span_len=3,
            text=f"a person oddly misplaced phrase number {i} outdoors",
            relaxed_span=False,
        )
        pairs.append((origin, bad))
    return pairs
