"""Nonparametric tests, correlations, and metric meta-evaluation.

The Wilcoxon tests enumerate their exact conditional null distribution
(mid-ranks for ties) whenever the sample size allows, and fall back to the
usual normal approximation with tie and continuity corrections above the
exactness bound. All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from scipy.special import betainc

from .errors import (
    CapevalError,
    InsufficientSampleError,
    UndefinedCorrelationError,
)
from .metrics import sts_lexical
from .text import SynonymLexicon, tokenize

EXACT_RANKSUM_LIMIT = 12   # total sample size for full enumeration
EXACT_SIGNED_RANK_LIMIT = 25  # nonzero pairs for full enumeration


@dataclass(frozen=True)
class TestResult:
    """Outcome of a significance test.

    p_greater / p_less are the upper and lower tail probabilities of the
    statistic under the null; the reported one-sided p is the tail in the
    direction of the observed effect.
    """

    __test__ = False  # despite the name, not a pytest class

    statistic: float
    p_greater: float
    p_less: float
    method: str  # "exact", "normal-approx", "t-dist" or "degenerate"
    n: int

    @property
    def p_one_sided(self) -> float:
        return min(self.p_greater, self.p_less)

    @property
    def p_two_sided(self) -> float:
        return min(1.0, 2.0 * self.p_one_sided)

    @property
    def degenerate(self) -> bool:
        return self.method == "degenerate"


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _tie_term(values: Sequence[float]) -> float:
    """Sum of t^3 - t over tie groups."""
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return float(sum(t ** 3 - t for t in counts.values() if t > 1))


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank (paired)
# ---------------------------------------------------------------------------

def signed_rank(pairs: Iterable[tuple[float, float]],
                exact_limit: int = EXACT_SIGNED_RANK_LIMIT) -> TestResult:
    """Paired signed-rank test on differences a - b.

    Statistic is W+, the mid-rank sum of positive differences. Zero
    differences are dropped; if none remain the result is degenerate.
    Exact enumeration (via the subset-sum distribution of W+) is used for
    up to `exact_limit` nonzero pairs.
    """
    diffs = [float(a) - float(b) for a, b in pairs]
    nonzero = [d for d in diffs if d != 0.0]
    m = len(nonzero)
    if m == 0:
        return TestResult(0.0, 1.0, 1.0, "degenerate", 0)

    ranks = _midranks([abs(d) for d in nonzero])
    w_plus = sum(r for d, r in zip(nonzero, ranks) if d > 0)

    if m <= exact_limit:
        # doubled ranks are integers even under mid-rank ties
        r2 = [round(2 * r) for r in ranks]
        total = sum(r2)
        counts = [0] * (total + 1)
        counts[0] = 1
        for r in r2:
            for w in range(total - r, -1, -1):
                if counts[w]:
                    counts[w + r] += counts[w]
        w2 = round(2 * w_plus)
        denom = float(2 ** m)
        p_greater = sum(counts[w2:]) / denom
        p_less = sum(counts[: w2 + 1]) / denom
        return TestResult(w_plus, p_greater, p_less, "exact", m)

    mu = m * (m + 1) / 4.0
    var = m * (m + 1) * (2 * m + 1) / 24.0 - _tie_term([abs(d) for d in nonzero]) / 48.0
    sd = math.sqrt(var)
    p_greater = _norm_sf((w_plus - mu - 0.5) / sd)
    p_less = 1.0 - _norm_sf((w_plus - mu + 0.5) / sd)
    return TestResult(w_plus, p_greater, p_less, "normal-approx", m)


# ---------------------------------------------------------------------------
# Wilcoxon rank-sum (two independent samples)
# ---------------------------------------------------------------------------

def ranksum(x: Sequence[float], y: Sequence[float],
            exact_limit: int = EXACT_RANKSUM_LIMIT) -> TestResult:
    """Rank-sum test; statistic is the mid-rank sum of `x` in the pool.

    Exact enumeration over all C(n, |x|) rank assignments when the pooled
    size is at most `exact_limit`, else normal approximation with tie
    correction.
    """
    if len(x) == 0 or len(y) == 0:
        raise ValueError("both samples must be nonempty")
    nx, ny = len(x), len(y)
    n = nx + ny
    pooled = [float(v) for v in x] + [float(v) for v in y]
    ranks = _midranks(pooled)
    w = sum(ranks[:nx])

    if n <= exact_limit:
        r2 = [round(2 * r) for r in ranks]
        w2 = round(2 * w)
        count_ge = count_le = total = 0
        for picks in combinations(range(n), nx):
            s = sum(r2[i] for i in picks)
            total += 1
            if s >= w2:
                count_ge += 1
            if s <= w2:
                count_le += 1
        return TestResult(w, count_ge / total, count_le / total, "exact", n)

    mu = nx * (n + 1) / 2.0
    var = (nx * ny / 12.0) * ((n + 1) - _tie_term(pooled) / (n * (n - 1)))
    sd = math.sqrt(var)
    if sd == 0.0:  # all pooled values identical
        return TestResult(w, 1.0, 1.0, "degenerate", n)
    p_greater = _norm_sf((w - mu - 0.5) / sd)
    p_less = 1.0 - _norm_sf((w - mu + 0.5) / sd)
    return TestResult(w, p_greater, p_less, "normal-approx", n)


# ---------------------------------------------------------------------------
# Pearson correlation and the Williams test
# ---------------------------------------------------------------------------

def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient."""
    if len(x) != len(y) or len(x) < 2:
        raise InsufficientSampleError("pearson needs two samples of equal size >= 2")
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((v - mx) ** 2 for v in x)
    syy = sum((v - my) ** 2 for v in y)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero variance sample")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


def student_t_sf(t: float, df: float) -> float:
    """Upper tail P(T > t) of Student's t via the regularized incomplete beta."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * betainc(df / 2.0, 0.5, x)
    return tail if t > 0 else 1.0 - tail


def williams(r12: float, r13: float, r23: float, n: int) -> TestResult:
    """Williams test for the difference between two dependent correlations
    r12 and r13 that share variable 1, with n observations.

    One-sided p (H1: r12 > r13) from a t distribution with n - 3 degrees
    of freedom.
    """
    if n < 4:
        raise InsufficientSampleError("williams requires n >= 4")
    for r in (r12, r13, r23):
        if not -1.0 < r < 1.0:
            raise ValueError("correlations must lie strictly inside (-1, 1)")
    det = 1.0 - r12 ** 2 - r13 ** 2 - r23 ** 2 + 2.0 * r12 * r13 * r23
    if det <= 0.0:
        raise ValueError("inconsistent correlation triple (non positive-definite)")
    rbar = (r12 + r13) / 2.0
    denom = 2.0 * det * (n - 1) / (n - 3) + (rbar ** 2) * (1.0 - r23) ** 3
    t = (r12 - r13) * math.sqrt((n - 1) * (1.0 + r23) / denom)
    p_greater = student_t_sf(t, n - 3)
    return TestResult(t, p_greater, 1.0 - p_greater, "t-dist", n)


# ---------------------------------------------------------------------------
# System significance matrix
# ---------------------------------------------------------------------------

@dataclass
class SignificanceMatrix:
    """Pairwise one-sided rank-sum wins at a fixed level.

    Systems are ordered by decreasing sample mean; cell (i, j) is True when
    system i significantly beats system j.
    """

    systems: list[str]
    wins: list[list[bool]]
    alpha: float
    p_values: list[list[float]] = field(default_factory=list)

    def win(self, a: str, b: str) -> bool:
        return self.wins[self.systems.index(a)][self.systems.index(b)]

    def ties(self) -> list[tuple[str, str]]:
        """Unordered pairs with no significant difference either way."""
        out = []
        for i in range(len(self.systems)):
            for j in range(i + 1, len(self.systems)):
                if not self.wins[i][j] and not self.wins[j][i]:
                    out.append((self.systems[i], self.systems[j]))
        return out

    def is_total_order(self, max_ties: int = 0) -> bool:
        return len(self.ties()) <= max_ties

    def render(self) -> str:
        """Compact grid: 'W' marks a significant win of row over column."""
        width = max(len(s) for s in self.systems)
        lines = [" " * (width + 2) + "  ".join(f"{s[:6]:>6}" for s in self.systems)]
        for i, name in enumerate(self.systems):
            cells = []
            for j in range(len(self.systems)):
                cells.append(f"{'W' if self.wins[i][j] else '-':>6}")
            lines.append(f"{name:<{width}}  " + "  ".join(cells))
        return "\n".join(lines)


def significance_matrix(samples: dict[str, Sequence[float]],
                        alpha: float = 0.05) -> SignificanceMatrix:
    """All-pairs one-sided rank-sum comparison of per-system score samples."""
    if len(samples) < 2:
        raise InsufficientSampleError("need at least two systems")
    systems = sorted(samples, key=lambda s: -(sum(samples[s]) / len(samples[s])))
    k = len(systems)
    wins = [[False] * k for _ in range(k)]
    p_values = [[1.0] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            result = ranksum(samples[systems[i]], samples[systems[j]])
            p_values[i][j] = result.p_greater
            wins[i][j] = result.p_greater < alpha
    return SignificanceMatrix(systems=systems, wins=wins, alpha=alpha,
                              p_values=p_values)


# ---------------------------------------------------------------------------
# Replication correlation and metric meta-evaluation
# ---------------------------------------------------------------------------

def replication_report(run1, run2) -> dict[str, float]:
    """Pearson correlation of system scores across two collection runs.

    Arguments are sequences of objects with system_id / raw_avg / z_avg
    attributes (analytics.SystemScore).
    """
    by_id1 = {s.system_id: s for s in run1}
    by_id2 = {s.system_id: s for s in run2}
    if set(by_id1) != set(by_id2):
        only1 = sorted(set(by_id1) - set(by_id2))
        only2 = sorted(set(by_id2) - set(by_id1))
        raise CapevalError(
            f"system sets differ between runs (only in first: {only1}, "
            f"only in second: {only2})"
        )
    ids = sorted(by_id1)
    return {
        "r_raw": pearson([by_id1[i].raw_avg for i in ids],
                         [by_id2[i].raw_avg for i in ids]),
        "r_z": pearson([by_id1[i].z_avg for i in ids],
                       [by_id2[i].z_avg for i in ids]),
    }


@dataclass
class MetaEvalReport:
    systems: list[str]
    correlations: dict[str, float]  # metric -> r against human z
    williams_tests: list[tuple[str, str, TestResult | None]]
    scatter: dict[str, list[tuple[str, float, float]]]

    def to_tsv(self) -> str:
        lines = ["metric\tr_vs_human"]
        for metric in sorted(self.correlations):
            lines.append(f"{metric}\t{self.correlations[metric]:.6f}")
        lines.append("metric_a\tmetric_b\tt\tp_one_sided")
        for a, b, result in self.williams_tests:
            if result is None:
                lines.append(f"{a}\t{b}\tn/a\tn/a")
            else:
                lines.append(
                    f"{a}\t{b}\t{result.statistic:.6f}\t{result.p_one_sided:.6g}"
                )
        return "\n".join(lines) + "\n"


def metric_meta_eval(metric_means: dict[str, dict[str, float]],
                     human_z: dict[str, float]) -> MetaEvalReport:
    """Correlate per-system metric means with human z scores.

    Every pair of metrics gets a Williams test of the difference between
    their (dependent) correlations with the human scores.
    """
    systems = sorted(
        set(human_z).intersection(*[set(v) for v in metric_means.values()])
    )
    if len(systems) < 4:
        raise InsufficientSampleError(
            f"meta-evaluation needs >= 4 systems, have {len(systems)}"
        )
    human = [human_z[s] for s in systems]
    correlations: dict[str, float] = {}
    scatter: dict[str, list[tuple[str, float, float]]] = {}
    for metric, means in metric_means.items():
        values = [means[s] for s in systems]
        correlations[metric] = pearson(human, values)
        scatter[metric] = [
            (s, means[s], human_z[s]) for s in systems
        ]
    tests: list[tuple[str, str, TestResult | None]] = []
    names = sorted(metric_means)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            r23 = pearson([metric_means[a][s] for s in systems],
                          [metric_means[b][s] for s in systems])
            try:
                result = williams(correlations[a], correlations[b], r23,
                                  len(systems))
            except ValueError:
                # perfect or inconsistent correlations leave the Williams
                # statistic undefined; report the pair as not comparable
                result = None
            tests.append((a, b, result))
    return MetaEvalReport(systems=systems, correlations=correlations,
                          williams_tests=tests, scatter=scatter)


# ---------------------------------------------------------------------------
# Inter-system caption similarity
# ---------------------------------------------------------------------------

@dataclass
class InterSystemSts:
    systems: list[str]
    matrix: list[list[float]]  # mean pairwise similarity; diagonal 1.0
    avg_to_others: dict[str, float]
    skipped_videos: list[str]

    def ranking(self) -> list[str]:
        return sorted(self.avg_to_others, key=lambda s: -self.avg_to_others[s])

    def to_tsv(self) -> str:
        lines = ["system\t" + "\t".join(self.systems) + "\tavg_to_others"]
        for i, name in enumerate(self.systems):
            row = "\t".join(f"{v:.6f}" for v in self.matrix[i])
            lines.append(f"{name}\t{row}\t{self.avg_to_others[name]:.6f}")
        return "\n".join(lines) + "\n"


def inter_system_sts(system_captions: dict[str, dict[str, str]],
                     synonyms: SynonymLexicon | None = None) -> InterSystemSts:
    """Average pairwise caption similarity among systems over shared videos."""
    if len(system_captions) < 2:
        raise InsufficientSampleError("need at least two systems")
    systems = sorted(system_captions)
    video_sets = [set(system_captions[s]) for s in systems]
    common = sorted(set.intersection(*video_sets))
    skipped = sorted(set.union(*video_sets) - set(common))
    if not common:
        raise CapevalError("no video is covered by every system")
    k = len(systems)
    sums = [[0.0] * k for _ in range(k)]
    for video in common:
        tokens = [tokenize(system_captions[s][video]) for s in systems]
        for i in range(k):
            for j in range(i + 1, k):
                sim = sts_lexical(tokens[i], tokens[j], synonyms)
                sums[i][j] += sim
                sums[j][i] += sim
    matrix = [
        [1.0 if i == j else sums[i][j] / len(common) for j in range(k)]
        for i in range(k)
    ]
    avg = {
        systems[i]: sum(matrix[i][j] for j in range(k) if j != i) / (k - 1)
        for i in range(k)
    }
    return InterSystemSts(systems=systems, matrix=matrix, avg_to_others=avg,
                          skipped_videos=skipped)
