"""A complete simulated assessment collection, end to end in memory.

Five synthetic systems with known latent quality gaps are scheduled into
HITs, assessed by a mixed crowd (diligent, random, constant workers), gated
by QC, z-standardized, aggregated caption-first, and compared pairwise for
significance. The latent ranking should come back out.
"""

from capeval.analytics import evaluate
from capeval.corpus import SystemRun
from capeval.hitplan import HitConfig, build_hits, estimate_cost
from capeval.simcrowd import (
    LatentConfig,
    LatentQuality,
    WorkerModel,
    expand_population,
    simulate_assessments,
    synthetic_degraded_pairs,
)
from capeval.stats import significance_matrix

runs = [
    SystemRun(f"sys{r}", f"group{r}",
              {f"v{i:03d}": f"placeholder caption {r} {i}" for i in range(60)})
    for r in range(5)
]
plan = build_hits(runs, synthetic_degraded_pairs(50), HitConfig(), seed=1)
print(f"{len(plan.hits)} HITs of {plan.config.hit_size} items "
      f"(estimated cost {estimate_cost(len(plan.hits), 0.99, 0.20):.2f} USD)")

latent = LatentQuality.from_plan(
    plan,
    LatentConfig(system_means={f"sys{r}": 22.0 + 14.0 * r for r in range(5)},
                 system_sd=8.0),
    seed=11,
)
population = expand_population([
    {"kind": "diligent", "count": 10, "noise_sd": 10.0},
    {"kind": "random-uniform", "count": 2},
    {"kind": "constant", "count": 1, "constant": 65},
])
records = simulate_assessments(plan, population, latent, seed=12)
print(f"{len(records)} assessments from {len(population)} workers")

result = evaluate(records, plan)
passed = sum(p.passed for p in result.profiles.values())
print(f"{passed}/{len(result.profiles)} workers passed QC\n")

print(f"{'system':<12} {'raw':>6} {'z':>8} {'n':>4}")
for score in result.scores:
    print(f"{score.system_id:<12} {score.raw_avg:>6.1f} "
          f"{score.z_avg:>+8.3f} {score.n:>4}")

samples = {s: v for s, v in result.table.z_samples().items()
           if s.startswith("sys")}
matrix = significance_matrix(samples, alpha=0.05)
print("\npairwise significant wins (rows beat columns):")
print(matrix.render())
print(f"ties: {matrix.ties() or 'none'}")
