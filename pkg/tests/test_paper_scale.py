"""Full-collection-scale checks: the counts and determinism guarantees that
matter at real corpus sizes, kept fast enough for the regular suite."""

import io
import time

from capeval.analytics import save_store
from capeval.corpus import Caption, load_corpus
from capeval.degradation import degrade_set
from capeval.hitplan import HitConfig, build_hits
from capeval.corpus import SystemRun
from capeval.simcrowd import (
    LatentConfig,
    LatentQuality,
    WorkerModel,
    simulate_assessments,
    synthetic_degraded_pairs,
)


def test_two_thousand_videos_four_thousand_captions(tmp_path):
    videos_path = tmp_path / "videos.tsv"
    captions_path = tmp_path / "captions.tsv"
    with open(videos_path, "w") as fh:
        for i in range(2000):
            fh.write(f"v{i:04d}\tclips/v{i:04d}.mp4\n")
    with open(captions_path, "w") as fh:
        for i in range(2000):
            fh.write(f"\tv{i:04d}\tA\tperson {i} does an activity outside\n")
            fh.write(f"\tv{i:04d}\tB\tsomeone number {i} moves around indoors\n")
    corpus = load_corpus(str(captions_path), str(videos_path))
    assert len(corpus.videos) == 2000
    assert len(corpus.captions) == 4000
    assert corpus.counts_by_source() == {"human-A": 2000, "human-B": 2000}


def test_degrade_set_at_collection_scale_is_deterministic():
    originals = [
        Caption(f"human-A:v{i:04d}", f"v{i:04d}",
                f"subject {i % 97} calmly performs action {i % 53} near "
                f"place {i % 31} today", "human-A")
        for i in range(1915)
    ]
    t0 = time.monotonic()
    first = degrade_set(originals, seed=1234)
    second = degrade_set(originals, seed=1234)
    elapsed = time.monotonic() - t0
    assert len(first) == 1915
    assert [d for _, d in first.pairs] == [d for _, d in second.pairs]
    assert elapsed < 60.0


def test_thousand_worker_simulation_byte_identical():
    runs = [SystemRun("sys0", "g",
                      {f"v{i:03d}": f"caption {i}" for i in range(40)})]
    plan = build_hits(runs, synthetic_degraded_pairs(20),
                      HitConfig(hit_size=30, qc_pairs=5, repeats=5), seed=2)
    latent = LatentQuality.from_plan(plan, LatentConfig(), seed=3)
    population = (
        [WorkerModel(kind="diligent", noise_sd=9.0)] * 600
        + [WorkerModel(kind="random-uniform")] * 300
        + [WorkerModel(kind="constant", constant=55)] * 50
        + [WorkerModel(kind="adversarial-inverted")] * 50
    )

    def store_bytes(seed):
        records = simulate_assessments(plan, population, latent, seed=seed)
        buf = io.StringIO()
        for record in records:
            buf.write(f"{record.worker_id}\t{record.item_id}\t"
                      f"{int(record.raw_score)}\t{record.timestamp:.3f}\n")
        return buf.getvalue().encode()

    assert store_bytes(77) == store_bytes(77)
    assert store_bytes(77) != store_bytes(78)


def test_store_writer_matches_manual_serialization(tmp_path):
    runs = [SystemRun("sys0", "g", {"v0": "a caption"})]
    plan = build_hits(runs, synthetic_degraded_pairs(5),
                      HitConfig(hit_size=8, qc_pairs=2, repeats=1), seed=1)
    latent = LatentQuality.from_plan(plan, LatentConfig(), seed=1)
    records = simulate_assessments(plan, [WorkerModel(kind="constant")],
                                   latent, seed=1)
    path = tmp_path / "store.tsv"
    save_store(records, str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == len(records)
    assert lines[0].count("\t") == 3
