import math

import numpy as np
import pytest

from oracles import mp_t_sf, oracle_ranksum, oracle_signed_rank, oracle_williams

from capeval.errors import (
    CapevalError,
    InsufficientSampleError,
    UndefinedCorrelationError,
)
from capeval.stats import (
    TestResult,
    inter_system_sts,
    metric_meta_eval,
    pearson,
    ranksum,
    replication_report,
    significance_matrix,
    signed_rank,
    student_t_sf,
    williams,
)


def as_pairs(diffs):
    return [(d, 0.0) for d in diffs]


# ---------------------------------------------------------------------------
# signed-rank
# ---------------------------------------------------------------------------

def test_signed_rank_all_positive_ten_pairs():
    result = signed_rank(as_pairs([1, 2, 3, 4, 5, 6, 7, 8, 9, 10]))
    assert result.method == "exact"
    assert result.p_greater == 2 ** -10
    assert result.p_one_sided == 2 ** -10


def test_signed_rank_five_pair_example_matches_brute_force():
    diffs = [1, 2, 3, 4, -1]
    result = signed_rank(as_pairs(diffs))
    w, ge, le = oracle_signed_rank(diffs)
    assert result.statistic == pytest.approx(w, abs=1e-12)
    assert result.p_greater == pytest.approx(ge, abs=1e-12)
    assert result.p_less == pytest.approx(le, abs=1e-12)


def test_signed_rank_antisymmetric_two_sided_one():
    result = signed_rank(as_pairs([2, 2, -2, -2]))
    assert result.p_two_sided == 1.0


def test_signed_rank_all_zero_degenerate():
    result = signed_rank(as_pairs([0, 0, 0]))
    assert result.degenerate
    assert result.p_greater == 1.0


def test_signed_rank_exact_matches_brute_force_all_small_sizes():
    rng = np.random.default_rng(42)
    for m in range(1, 9):
        for trial in range(30):
            # mix of continuous and tie-heavy integer differences
            if trial % 2:
                diffs = rng.normal(0, 1, size=m)
            else:
                diffs = rng.integers(-3, 4, size=m).astype(float)
            if not np.any(diffs):
                continue
            result = signed_rank(as_pairs(diffs))
            w, ge, le = oracle_signed_rank(diffs)
            assert result.statistic == pytest.approx(w, abs=1e-12)
            assert result.p_greater == pytest.approx(ge, abs=1e-12)
            assert result.p_less == pytest.approx(le, abs=1e-12)


def test_signed_rank_normal_path_close_to_exact():
    rng = np.random.default_rng(3)
    for _ in range(20):
        diffs = rng.normal(0.3, 1, size=30)
        exact = signed_rank(as_pairs(diffs), exact_limit=30)
        approx = signed_rank(as_pairs(diffs))
        assert exact.method == "exact" and approx.method == "normal-approx"
        assert approx.p_greater == pytest.approx(exact.p_greater, abs=0.01)
        assert approx.p_less == pytest.approx(exact.p_less, abs=0.01)


# ---------------------------------------------------------------------------
# rank-sum
# ---------------------------------------------------------------------------

def test_ranksum_extreme_example():
    result = ranksum([1, 2], [3, 4])
    assert result.method == "exact"
    assert result.p_less == pytest.approx(1 / 6, abs=1e-15)
    assert result.p_one_sided == pytest.approx(1 / 6, abs=1e-15)


def test_ranksum_identical_samples_two_sided_one():
    result = ranksum([1, 2, 3], [1, 2, 3])
    assert result.p_two_sided == 1.0


def test_ranksum_exact_matches_brute_force_all_small_sizes():
    rng = np.random.default_rng(11)
    for nx in range(1, 7):
        for ny in range(1, 9 - nx):
            for trial in range(15):
                if trial % 2:
                    x = rng.normal(0, 1, size=nx)
                    y = rng.normal(0.5, 1, size=ny)
                else:
                    x = rng.integers(0, 4, size=nx).astype(float)
                    y = rng.integers(0, 4, size=ny).astype(float)
                result = ranksum(x, y)
                w, ge, le = oracle_ranksum(x, y)
                assert result.method == "exact"
                assert result.statistic == pytest.approx(w, abs=1e-12)
                assert result.p_greater == pytest.approx(ge, abs=1e-12)
                assert result.p_less == pytest.approx(le, abs=1e-12)


def test_ranksum_normal_path_close_to_exact_8_plus_8():
    rng = np.random.default_rng(5)
    for _ in range(15):
        x = rng.normal(0, 1, size=8)
        y = rng.normal(0.7, 1, size=8)
        exact = ranksum(x, y, exact_limit=16)
        approx = ranksum(x, y, exact_limit=12)
        assert exact.method == "exact" and approx.method == "normal-approx"
        assert approx.p_greater == pytest.approx(exact.p_greater, abs=0.02)
        assert approx.p_less == pytest.approx(exact.p_less, abs=0.02)


# ---------------------------------------------------------------------------
# pearson
# ---------------------------------------------------------------------------

def test_pearson_perfect_lines():
    x = [1.0, 2.0, 3.0, 4.0]
    assert pearson(x, [2 * v + 1 for v in x]) == pytest.approx(1.0, abs=1e-12)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-12)


def test_pearson_formula_example():
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(9 / math.sqrt(84), abs=1e-12)


def test_pearson_zero_variance_error():
    with pytest.raises(UndefinedCorrelationError):
        pearson([1, 1, 1], [1, 2, 3])


def test_pearson_affine_invariance_and_antisymmetry():
    rng = np.random.default_rng(9)
    for _ in range(20):
        x = rng.normal(size=10)
        y = rng.normal(size=10)
        base = pearson(x, y)
        assert pearson(3.5 * x + 2, y) == pytest.approx(base, abs=1e-12)
        assert pearson(x, 0.25 * y - 7) == pytest.approx(base, abs=1e-12)
        assert pearson([-v for v in x], y) == pytest.approx(-base, abs=1e-12)


# ---------------------------------------------------------------------------
# t tail and Williams test
# ---------------------------------------------------------------------------

def test_t_tail_against_mpmath():
    for df in (1, 2, 5, 17, 40):
        for t in (-4.0, -1.3, -0.2, 0.0, 0.5, 2.0, 6.5):
            assert student_t_sf(t, df) == pytest.approx(
                float(mp_t_sf(t, df)), abs=1e-10)


def test_williams_equal_correlations():
    result = williams(0.6, 0.6, 0.3, 12)
    assert result.statistic == 0.0
    assert result.p_one_sided == 0.5
    assert result.p_greater == 0.5


def test_williams_antisymmetry():
    a = williams(0.9, 0.1, 0.0, 20)
    b = williams(0.1, 0.9, 0.0, 20)
    assert a.statistic == pytest.approx(-b.statistic, abs=1e-12)
    assert a.p_greater == pytest.approx(b.p_less, abs=1e-12)


def test_williams_against_oracle_on_random_tuples():
    rng = np.random.default_rng(123)
    checked = 0
    while checked < 50:
        n = int(rng.integers(5, 40))
        data = rng.multivariate_normal(
            [0, 0, 0],
            np.eye(3) + 0.5 * np.ones((3, 3)),
            size=n,
        )
        c = np.corrcoef(data.T)
        r12, r13, r23 = c[0, 1], c[0, 2], c[1, 2]
        if max(abs(r12), abs(r13), abs(r23)) >= 0.999:
            continue
        t_ref, p_ref = oracle_williams(r12, r13, r23, n)
        result = williams(r12, r13, r23, n)
        assert result.statistic == pytest.approx(t_ref, abs=1e-8)
        assert result.p_greater == pytest.approx(p_ref, abs=1e-8)
        checked += 1


def test_williams_input_validation():
    with pytest.raises(InsufficientSampleError):
        williams(0.5, 0.2, 0.1, 3)
    with pytest.raises(ValueError):
        williams(1.0, 0.2, 0.1, 10)


# ---------------------------------------------------------------------------
# significance matrix
# ---------------------------------------------------------------------------

def test_matrix_identical_samples_no_wins():
    m = significance_matrix({"a": [1.0, 2.0, 3.0] * 4, "b": [1.0, 2.0, 3.0] * 4})
    assert not m.win("a", "b") and not m.win("b", "a")
    assert m.ties() == [("a", "b")]


def test_matrix_clear_win():
    m = significance_matrix({"hi": [1.0] * 10, "lo": [0.0] * 10})
    assert m.win("hi", "lo")
    assert not m.win("lo", "hi")
    assert m.systems == ["hi", "lo"]
    assert m.is_total_order()


def test_matrix_never_mutual_wins_random():
    rng = np.random.default_rng(21)
    for _ in range(20):
        samples = {
            f"s{k}": rng.normal(rng.normal(0, 1), 1, size=rng.integers(5, 30))
            for k in range(4)
        }
        m = significance_matrix(samples)
        for i in range(4):
            assert not m.wins[i][i]
            for j in range(4):
                if i != j:
                    assert not (m.wins[i][j] and m.wins[j][i])


def test_matrix_render_grid():
    m = significance_matrix({"hi": [1.0] * 10, "lo": [0.0] * 10})
    text = m.render()
    assert "W" in text and "-" in text
    assert text.splitlines()[1].startswith("hi")


# ---------------------------------------------------------------------------
# replication report and meta-evaluation
# ---------------------------------------------------------------------------

class FakeScore:
    def __init__(self, system_id, raw_avg, z_avg):
        self.system_id = system_id
        self.raw_avg = raw_avg
        self.z_avg = z_avg


def test_replication_identical_runs():
    run = [FakeScore(f"s{i}", 40.0 + i * 7, -0.5 + i * 0.2) for i in range(5)]
    out = replication_report(run, list(run))
    assert out["r_raw"] == pytest.approx(1.0, abs=1e-12)
    assert out["r_z"] == pytest.approx(1.0, abs=1e-12)


def test_replication_mismatched_systems_error():
    run1 = [FakeScore("a", 1, 0.1), FakeScore("b", 2, 0.2)]
    run2 = [FakeScore("a", 1, 0.1), FakeScore("c", 2, 0.2)]
    with pytest.raises(CapevalError, match="c"):
        replication_report(run1, run2)


def test_meta_eval_perfect_and_inverted_metric():
    human = {f"s{i}": float(i) for i in range(5)}
    metric_means = {
        "good": {f"s{i}": 2.0 * i + 1 for i in range(5)},
        "bad": {f"s{i}": -float(i) for i in range(5)},
    }
    report = metric_meta_eval(metric_means, human)
    assert report.correlations["good"] == pytest.approx(1.0, abs=1e-12)
    assert report.correlations["bad"] == pytest.approx(-1.0, abs=1e-12)


def test_meta_eval_williams_inputs_derived_from_pairwise_r():
    rng = np.random.default_rng(2)
    human = {f"s{i}": float(v) for i, v in enumerate(rng.normal(size=6))}
    metric_means = {
        "m1": {s: human[s] + rng.normal(0, 0.3) for s in human},
        "m2": {s: -human[s] + rng.normal(0, 0.3) for s in human},
    }
    report = metric_meta_eval(metric_means, human)
    systems = report.systems
    r12 = pearson([human[s] for s in systems],
                  [metric_means["m1"][s] for s in systems])
    r13 = pearson([human[s] for s in systems],
                  [metric_means["m2"][s] for s in systems])
    r23 = pearson([metric_means["m1"][s] for s in systems],
                  [metric_means["m2"][s] for s in systems])
    expected = williams(r12, r13, r23, len(systems))
    (a, b, result), = report.williams_tests
    assert (a, b) == ("m1", "m2")
    assert result.statistic == pytest.approx(expected.statistic, abs=1e-12)


def test_meta_eval_requires_four_systems():
    human = {"a": 1.0, "b": 2.0, "c": 3.0}
    with pytest.raises(InsufficientSampleError):
        metric_meta_eval({"m": {"a": 1, "b": 2, "c": 3}}, human)


# ---------------------------------------------------------------------------
# inter-system similarity
# ---------------------------------------------------------------------------

def test_inter_system_sts_identical_captions():
    captions = {s: {"v1": "a dog runs", "v2": "a cat naps"} for s in ("x", "y", "z")}
    out = inter_system_sts(captions)
    for i in range(3):
        for j in range(3):
            assert out.matrix[i][j] == pytest.approx(1.0)
    assert out.skipped_videos == []


def test_inter_system_sts_matches_brute_force():
    from capeval.metrics import sts_lexical
    from capeval.text import tokenize

    captions = {
        "x": {"v1": "a dog runs", "v2": "a man walks home"},
        "y": {"v1": "a dog sleeps", "v2": "the man walks"},
        "z": {"v1": "the red ball", "v2": "a man runs home"},
    }
    out = inter_system_sts(captions)
    names = out.systems
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            if i == j:
                continue
            expected = np.mean([
                sts_lexical(tokenize(captions[a][v]), tokenize(captions[b][v]))
                for v in ("v1", "v2")
            ])
            assert out.matrix[i][j] == pytest.approx(float(expected), abs=1e-12)
    ranking = out.ranking()
    assert set(ranking) == set(names)


def test_inter_system_sts_skips_uncovered_videos():
    captions = {
        "x": {"v1": "a dog", "v2": "a cat"},
        "y": {"v1": "a dog"},
    }
    out = inter_system_sts(captions)
    assert out.skipped_videos == ["v2"]
