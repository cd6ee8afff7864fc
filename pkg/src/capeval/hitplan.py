"""Assessment batch (HIT) assembly.

Each HIT holds a fixed number of display items: hidden quality-control
pairs (a human caption and its degraded counterpart), exact repeats of
system items from the same HIT, and the system captions under evaluation.
Workers never see item roles; the worker-facing projection is schema
identical for every item kind.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import Caption, SystemRun
from .degradation import DegradedCaption
from .errors import PlanError
from .rngutil import GENERATOR_NAME, generator


@dataclass(frozen=True)
class ItemRole:
    kind: str  # "system", "qc-good", "qc-bad", "repeat"
    run_id: str | None = None        # system items
    source: str | None = None        # qc items: origin caption source label
    pair_item_id: str | None = None  # qc-bad: its qc-good partner
    repeat_of: str | None = None     # repeat: the repeated item

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class DisplayItem:
    item_id: str
    video_id: str
    caption_id: str
    text: str
    role: ItemRole

    def worker_view(self, position: int, total: int, video_url: str = "") -> dict:
        """Projection sent to assessors; never includes the role."""
        return {
            "item_id": self.item_id,
            "video_id": self.video_id,
            "video_url": video_url,
            "caption": self.text,
            "position": position,
            "total": total,
        }


@dataclass
class Hit:
    hit_id: str
    items: list[DisplayItem]
    padded: bool = False

    def __len__(self) -> int:
        return len(self.items)

    def composition(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for item in self.items:
            counts[item.role.kind] = counts.get(item.role.kind, 0) + 1
        return counts


@dataclass
class HitConfig:
    hit_size: int = 100   # H
    qc_pairs: int = 10    # P
    repeats: int = 10     # R
    min_repeat_distance: int = 20

    def system_slots(self) -> int:
        slots = self.hit_size - 2 * self.qc_pairs - self.repeats
        if slots < 1:
            raise PlanError(
                f"hit composition leaves no system slots "
                f"(H={self.hit_size}, P={self.qc_pairs}, R={self.repeats})"
            )
        return slots


@dataclass
class HitPlan:
    hits: list[Hit]
    seed: int
    config: HitConfig
    video_urls: dict[str, str] = field(default_factory=dict)
    generator: str = GENERATOR_NAME

    def __post_init__(self):
        self._items = {
            item.item_id: item for hit in self.hits for item in hit.items
        }
        self._hit_of = {
            item.item_id: hit.hit_id for hit in self.hits for item in hit.items
        }

    def item(self, item_id: str) -> DisplayItem:
        try:
            return self._items[item_id]
        except KeyError:
            raise PlanError(f"unknown item {item_id!r}") from None

    def hit_of(self, item_id: str) -> str | None:
        return self._hit_of.get(item_id)

    def resolve(self, item_id: str) -> tuple[str, str, str]:
        """(kind, system-or-source id, caption_id) for scoring purposes.

        Repeats resolve to the item they repeat, so both assessments of a
        caption land in the same bucket.
        """
        item = self.item(item_id)
        role = item.role
        if role.kind == "repeat":
            kind, system_id, caption_id = self.resolve(role.repeat_of)
            return "repeat", system_id, caption_id
        if role.kind == "system":
            return "system", role.run_id, item.caption_id
        if role.kind == "qc-good":
            return "qc-good", role.source, item.caption_id
        return "qc-bad", "degraded", item.caption_id

    def coverage(self) -> dict[tuple[str, str], int]:
        """(run_id, video_id) -> number of system slots scheduled."""
        counts: dict[tuple[str, str], int] = {}
        for hit in self.hits:
            for item in hit.items:
                if item.role.kind == "system":
                    key = (item.role.run_id, item.video_id)
                    counts[key] = counts.get(key, 0) + 1
        return counts


def build_hits(runs: Sequence[SystemRun],
               degraded_pairs: Sequence[tuple[Caption, DegradedCaption]],
               config: HitConfig,
               seed: int,
               video_urls: dict[str, str] | None = None) -> HitPlan:
    """Assemble HITs covering every system caption at least once.

    Deterministic under (runs, degraded pairs, config, seed). The final HIT
    is padded with extra repeats (and flagged) when the system captions do
    not fill it.
    """
    if not runs:
        raise PlanError("no system runs to schedule")
    if config.qc_pairs > 0 and len(degraded_pairs) < config.qc_pairs:
        raise PlanError(
            f"need >= {config.qc_pairs} degraded pairs, have {len(degraded_pairs)}"
        )

    rng = generator(seed)
    pool = [
        (run.run_id, video_id, run.captions[video_id])
        for run in runs
        for video_id in sorted(run.captions)
    ]
    order = rng.permutation(len(pool))
    pool = [pool[i] for i in order]

    slots = config.system_slots()
    n_hits = math.ceil(len(pool) / slots)

    pair_order: list[int] = []

    def next_pairs(count: int) -> list[tuple[Caption, DegradedCaption]]:
        nonlocal pair_order
        out = []
        for _ in range(count):
            if not pair_order:
                pair_order = list(rng.permutation(len(degraded_pairs)))
            out.append(degraded_pairs[pair_order.pop()])
        return out

    item_counter = 0

    def new_id() -> str:
        nonlocal item_counter
        item_counter += 1
        return f"itm-{item_counter:05d}"

    hits: list[Hit] = []
    for hit_index in range(n_hits):
        chunk = pool[hit_index * slots:(hit_index + 1) * slots]
        shortfall = slots - len(chunk)

        items: list[DisplayItem] = []
        for run_id, video_id, text in chunk:
            items.append(DisplayItem(
                item_id=new_id(),
                video_id=video_id,
                caption_id=f"system:{run_id}:{video_id}",
                text=text,
                role=ItemRole(kind="system", run_id=run_id),
            ))
        system_items = list(items)

        for origin, bad in next_pairs(config.qc_pairs):
            good = DisplayItem(
                item_id=new_id(),
                video_id=origin.video_id,
                caption_id=origin.caption_id,
                text=origin.text,
                role=ItemRole(kind="qc-good", source=origin.source),
            )
            items.append(good)
            items.append(DisplayItem(
                item_id=new_id(),
                video_id=bad.video_id,
                caption_id=bad.caption_id,
                text=bad.text,
                role=ItemRole(kind="qc-bad", source=origin.source,
                              pair_item_id=good.item_id),
            ))

        n_repeats = config.repeats + shortfall
        sources: list[DisplayItem] = []
        while len(sources) < n_repeats:
            take = min(len(system_items), n_repeats - len(sources))
            picks = rng.choice(len(system_items), size=take, replace=False)
            sources.extend(system_items[int(i)] for i in picks)
        for src in sources:
            items.append(DisplayItem(
                item_id=new_id(),
                video_id=src.video_id,
                caption_id=src.caption_id,
                text=src.text,
                role=ItemRole(kind="repeat", repeat_of=src.item_id),
            ))

        ordered = _place_items(items, rng, config)
        hits.append(Hit(
            hit_id=f"hit-{hit_index + 1:04d}",
            items=ordered,
            padded=shortfall > 0,
        ))

    return HitPlan(hits=hits, seed=seed, config=config,
                   video_urls=dict(video_urls or {}))


def _place_items(items: list[DisplayItem], rng,
                 config: HitConfig) -> list[DisplayItem]:
    """Shuffle, then keep each repeat at least `min_repeat_distance`
    positions away from its source, relaxing the distance if the HIT is too
    small to satisfy it. Deterministic given the generator state."""
    order = [items[int(i)] for i in rng.permutation(len(items))]
    distance = min(config.min_repeat_distance, max(1, len(order) // 2))
    while distance >= 1:
        if _repair_spacing(order, distance):
            return order
        distance -= 1
    return order


def _repair_spacing(order: list[DisplayItem], distance: int) -> bool:
    """Swap repeats away from their sources until all gaps >= distance."""
    pos = {item.item_id: idx for idx, item in enumerate(order)}
    repeats = [item for item in order if item.role.kind == "repeat"]

    def violations() -> list[DisplayItem]:
        return [r for r in repeats
                if abs(pos[r.item_id] - pos[r.role.repeat_of]) < distance]

    def swap(i: int, j: int) -> None:
        order[i], order[j] = order[j], order[i]
        pos[order[i].item_id] = i
        pos[order[j].item_id] = j

    for _ in range(4 * len(order)):
        bad = violations()
        if not bad:
            return True
        repeat = bad[0]
        src_pos = pos[repeat.role.repeat_of]
        own_pos = pos[repeat.item_id]
        candidates = sorted(
            (t for t in range(len(order)) if abs(t - src_pos) >= distance),
            key=lambda t: (-abs(t - src_pos), t),
        )
        count_before = len(bad)
        moved = False
        for target in candidates:
            if order[target].role.kind == "repeat":
                continue
            swap(own_pos, target)
            if len(violations()) < count_before:
                moved = True
                break
            swap(own_pos, target)  # undo: the displaced item broke something
        if not moved:
            return False
    return not violations()


def estimate_cost(num_hits: int, rate_per_hit: float,
                  fee_fraction: float) -> float:
    """Total collection cost: num_hits * rate * (1 + fee)."""
    if num_hits < 0 or rate_per_hit < 0 or fee_fraction < 0:
        raise ValueError("cost inputs must be nonnegative")
    return num_hits * rate_per_hit * (1.0 + fee_fraction)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def plan_to_json(plan: HitPlan, meta: dict | None = None) -> dict:
    return {
        "_meta": meta or {},
        "seed": plan.seed,
        "generator": plan.generator,
        "config": {
            "hit_size": plan.config.hit_size,
            "qc_pairs": plan.config.qc_pairs,
            "repeats": plan.config.repeats,
            "min_repeat_distance": plan.config.min_repeat_distance,
        },
        "video_urls": plan.video_urls,
        "hits": [
            {
                "hit_id": hit.hit_id,
                "padded": hit.padded,
                "items": [
                    {
                        "item_id": item.item_id,
                        "video_id": item.video_id,
                        "caption_id": item.caption_id,
                        "text": item.text,
                        "role": item.role.to_json(),
                    }
                    for item in hit.items
                ],
            }
            for hit in plan.hits
        ],
    }


def save_plan(plan: HitPlan, path: str, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan_to_json(plan, meta), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_plan(path: str) -> HitPlan:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    config = HitConfig(**data["config"])
    hits = []
    for hit_data in data["hits"]:
        items = [
            DisplayItem(
                item_id=i["item_id"],
                video_id=i["video_id"],
                caption_id=i["caption_id"],
                text=i["text"],
                role=ItemRole(**i["role"]),
            )
            for i in hit_data["items"]
        ]
        hits.append(Hit(hit_id=hit_data["hit_id"], items=items,
                        padded=hit_data["padded"]))
    return HitPlan(hits=hits, seed=data["seed"], config=config,
                   video_urls=data.get("video_urls", {}),
                   generator=data.get("generator", GENERATOR_NAME))


def write_worker_export(plan: HitPlan, path: str) -> None:
    """Worker-facing plan projection: no roles, no caption ids."""
    payload = {
        "hits": [
            {
                "hit_id": hit.hit_id,
                "items": [
                    item.worker_view(pos + 1, len(hit.items),
                                     plan.video_urls.get(item.video_id, ""))
                    for pos, item in enumerate(hit.items)
                ],
            }
            for hit in plan.hits
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_mturk_batch(plan: HitPlan, path: str) -> None:
    """Batch CSV: one row per HIT, item payload columns, no hidden roles."""
    width = max(len(hit.items) for hit in plan.hits)
    fields = ["hit_id"]
    for i in range(1, width + 1):
        fields += [f"item{i}_id", f"item{i}_video_url", f"item{i}_caption"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, restval="")
        writer.writeheader()
        for hit in plan.hits:
            row = {"hit_id": hit.hit_id}
            for i, item in enumerate(hit.items, start=1):
                row[f"item{i}_id"] = item.item_id
                row[f"item{i}_video_url"] = plan.video_urls.get(item.video_id, "")
                row[f"item{i}_caption"] = item.text
            writer.writerow(row)
