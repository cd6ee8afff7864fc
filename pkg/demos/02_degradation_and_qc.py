"""Caption degradation and the worker quality-control gate.

Degrades a few captions by the substitution rules, prints the before/after
texts, then measures the QC gate empirically: how often does each worker
archetype pass when scored on ten hidden good/degraded pairs?
"""

from capeval.corpus import Caption
from capeval.degradation import degrade, words_to_replace
from capeval.simcrowd import WorkerModel, qc_power_report

captions = [
    "a woman and a man are kissing each other",
    "a dog imitating a baby crawling across the floor in a living room",
    "3 balls hover in front of a man",
    "a person wearing a costume and carrying a chainsaw",
]
pool = [Caption(f"cap{i}", f"v{i}", text, "human-A")
        for i, text in enumerate(captions)]

print("substitution rule: tokens replaced by caption length")
for n in (1, 3, 7, 12, 18, 24, 40):
    print(f"  {n:>3} tokens -> {words_to_replace(n)} replaced")

print("\ndegraded captions (seed 7):")
for caption in pool:
    out = degrade(caption, pool, seed=7)
    flag = "  [relaxed span]" if out.relaxed_span else ""
    print(f"  original: {caption.text}")
    print(f"  degraded: {out.text}{flag}\n")

print("QC gate pass rates (10 hidden pairs per worker, 300 trials each):")
report = qc_power_report(
    [
        WorkerModel(kind="diligent", noise_sd=10.0),
        WorkerModel(kind="random-uniform"),
        WorkerModel(kind="constant", constant=80),
        WorkerModel(kind="adversarial-inverted"),
    ],
    pairs=10,
    trials=300,
    seed=42,
)
print(report.to_tsv())
