#!/usr/bin/env python3
"""Regenerate the bundled synthetic sample corpus under data/sample/.

Fifty videos, two reference sets, four description runs of graded quality,
one ranking run, and a simulation config. Everything is deterministic; the
data is synthetic and exists only for demos and desk-scale tests.
"""

from __future__ import annotations

import json
import os

import numpy as np

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "sample")

SUBJECTS = [
    "a dog", "a cat", "a man", "a woman", "a child", "two kids",
    "a group of people", "a bird", "an old man", "a young woman",
]
ACTIONS = [
    "runs", "jumps", "dances", "sleeps", "eats a snack", "plays guitar",
    "rides a bike", "kicks a ball", "waves at the camera", "spins around",
]
PLACES = [
    "in the park", "on the street", "in a kitchen", "near the beach",
    "in a living room", "at a playground", "on a rooftop", "in the garden",
    "at a market", "on a bridge",
]
TIMES = ["during the day", "at night", "in the morning", "at sunset"]

GENERIC = [
    "a person is doing something outside",
    "someone moves around in a room",
    "people are doing an activity together",
    "an animal does something funny",
]


def caption_parts(rng):
    return (rng.choice(SUBJECTS), rng.choice(ACTIONS), rng.choice(PLACES),
            rng.choice(TIMES))


def main() -> None:
    rng = np.random.default_rng(20160915)
    os.makedirs(os.path.join(OUT, "runs"), exist_ok=True)
    os.makedirs(os.path.join(OUT, "ranking"), exist_ok=True)

    videos = [f"v{i:03d}" for i in range(50)]
    parts = {v: caption_parts(rng) for v in videos}

    with open(os.path.join(OUT, "videos.tsv"), "w") as fh:
        fh.write("# synthetic sample corpus: videos\n")
        for v in videos:
            fh.write(f"{v}\tclips/{v}.mp4\n")

    with open(os.path.join(OUT, "captions.tsv"), "w") as fh:
        fh.write("# synthetic sample corpus: reference sets A and B\n")
        for v in videos:
            subj, act, place, when = parts[v]
            fh.write(f"human-A:{v}\t{v}\tA\t{subj} {act} {place}\n")
            # the B annotator saw the same scene but phrased it differently
            fh.write(f"human-B:{v}\t{v}\tB\t{subj} {act} {place} {when}\n")

    def write_run(name, caption_of):
        with open(os.path.join(OUT, "runs", f"{name}.tsv"), "w") as fh:
            fh.write(f"# synthetic sample run: {name}\n")
            for v in videos:
                fh.write(f"{v}\t{caption_of(v)}\n")

    def alpha(v):  # strong system: near-copy of the A reference
        subj, act, place, _ = parts[v]
        if rng.random() < 0.3:
            place = rng.choice(PLACES)
        return f"{subj} {act} {place}"

    def bravo(v):  # mid system: right subject, wrong action half the time
        subj, act, place, _ = parts[v]
        if rng.random() < 0.5:
            act = rng.choice(ACTIONS)
        return f"{subj} {act} {rng.choice(PLACES)}"

    def charlie(v):  # weak system: generic captions
        return str(rng.choice(GENERIC))

    def delta(v):  # poor system: describes a different video
        other = videos[(videos.index(v) + 17) % len(videos)]
        subj, act, place, _ = parts[other]
        return f"{subj} {act} {place}"

    write_run("run_alpha", alpha)
    write_run("run_bravo", bravo)
    write_run("run_charlie", charlie)
    write_run("run_delta", delta)

    # ranking run over set A: correct caption near the top, quality varies
    ids = [f"human-A:{v}" for v in videos]
    with open(os.path.join(OUT, "ranking", "rank_alpha.tsv"), "w") as fh:
        fh.write("# synthetic sample ranking run over set A\n")
        for i, v in enumerate(videos):
            correct = f"human-A:{v}"
            others = [c for c in ids if c != correct]
            rng.shuffle(others)
            rank = int(rng.integers(1, 6)) if i % 5 else 1
            ranked = others[:rank - 1] + [correct] + others[rank - 1:]
            fh.write(f"{v}\t{','.join(ranked)}\n")

    sim_config = {
        "seed": 2016,
        "population": [
            {"kind": "diligent", "count": 20, "noise_sd": 10.0},
            {"kind": "random-uniform", "count": 3},
            {"kind": "constant", "count": 1, "constant": 80},
        ],
        "latent": {
            "system_means": {
                "run_alpha": 75.0,
                "run_bravo": 60.0,
                "run_charlie": 45.0,
                "run_delta": 30.0,
                "human-B": 88.0,
            },
            "system_sd": 8.0,
            "qc_good_low": 65.0,
            "qc_good_high": 95.0,
            "degradation_penalty": 30.0,
        },
    }
    with open(os.path.join(OUT, "sim_config.json"), "w") as fh:
        json.dump(sim_config, fh, indent=2)
        fh.write("\n")

    print(f"sample corpus written to {os.path.abspath(OUT)}")


if __name__ == "__main__":
    main()
