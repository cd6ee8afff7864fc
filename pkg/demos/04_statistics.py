"""The statistical machinery on its own.

Exact versus approximate Wilcoxon tails, the Williams test for dependent
correlations, and replication correlation between two score tables.
"""

import numpy as np

from capeval.stats import pearson, ranksum, signed_rank, williams

rng = np.random.default_rng(0)

# Exact signed-rank: ten positive differences pin the one-sided p at 2^-10.
pairs = [(80 + d, 50) for d in range(10)]
result = signed_rank(pairs)
print(f"signed-rank, 10 positive pairs: W+={result.statistic:.0f}, "
      f"one-sided p={result.p_greater:.6f} (= 1/1024)")

# The same test flips to a normal approximation past 25 nonzero pairs.
big = [(float(rng.normal(60, 8)), float(rng.normal(55, 8))) for _ in range(40)]
exact = signed_rank(big, exact_limit=40)
approx = signed_rank(big)
print(f"40 pairs: exact p={exact.p_greater:.5f}  "
      f"normal p={approx.p_greater:.5f}  ({approx.method})")

# Rank-sum with small samples enumerates every rank assignment.
result = ranksum([1.0, 2.0], [3.0, 4.0])
print(f"rank-sum x=(1,2) y=(3,4): one-sided p={result.p_one_sided:.4f} (=1/6)")

# Williams: is metric A's correlation with humans higher than metric B's,
# given that A and B also correlate with each other?
human = rng.normal(size=12)
metric_a = human + rng.normal(0, 0.4, size=12)
metric_b = -0.3 * human + rng.normal(0, 1.0, size=12)
r12 = pearson(human, metric_a)
r13 = pearson(human, metric_b)
r23 = pearson(metric_a, metric_b)
result = williams(r12, r13, r23, 12)
print(f"williams(r12={r12:+.3f}, r13={r13:+.3f}, r23={r23:+.3f}, n=12): "
      f"t={result.statistic:.3f}, one-sided p={result.p_greater:.4f}")

# Replication: two noisy measurements of the same five systems.
class Score:
    def __init__(self, system_id, raw, z):
        self.system_id, self.raw_avg, self.z_avg = system_id, raw, z

truth = [30, 45, 60, 75, 88]
run1 = [Score(f"s{i}", t + rng.normal(0, 1), (t - 60) / 20) for i, t in enumerate(truth)]
run2 = [Score(f"s{i}", t + rng.normal(0, 1), (t - 60) / 20 + rng.normal(0, 0.02))
        for i, t in enumerate(truth)]
from capeval.stats import replication_report
out = replication_report(run1, run2)
print(f"replication: r_raw={out['r_raw']:.4f}, r_z={out['r_z']:.4f}")
