"""Independent reference implementations used to freeze expected values.

These deliberately take different code paths from the library: scipy rank
utilities, full enumeration, high-precision mpmath evaluation, and numpy
vector algebra over explicit vocabularies.
"""

import itertools
import math

import mpmath as mp
import numpy as np
import scipy.stats as ss


def oracle_signed_rank(diffs):
    """Brute-force signed-rank tails by enumerating every sign pattern."""
    nonzero = [d for d in diffs if d != 0]
    ranks = ss.rankdata([abs(d) for d in nonzero])
    w_obs = float(sum(r for d, r in zip(nonzero, ranks) if d > 0))
    ge = le = 0
    m = len(nonzero)
    for signs in itertools.product((1, -1), repeat=m):
        w = float(sum(r for s, r in zip(signs, ranks) if s > 0))
        if w >= w_obs:
            ge += 1
        if w <= w_obs:
            le += 1
    return w_obs, ge / 2 ** m, le / 2 ** m


def oracle_ranksum(x, y):
    """Brute-force rank-sum tails over all C(n, |x|) rank assignments."""
    pooled = list(x) + list(y)
    ranks = ss.rankdata(pooled)
    nx = len(x)
    w_obs = float(sum(ranks[:nx]))
    ge = le = total = 0
    for picks in itertools.combinations(range(len(pooled)), nx):
        w = float(sum(ranks[i] for i in picks))
        total += 1
        if w >= w_obs:
            ge += 1
        if w <= w_obs:
            le += 1
    return w_obs, ge / total, le / total


def mp_t_sf(t, df):
    """High-precision Student-t upper tail."""
    t = mp.mpf(t)
    df = mp.mpf(df)
    x = df / (df + t * t)
    tail = mp.betainc(df / 2, mp.mpf("0.5"), 0, x, regularized=True) / 2
    return tail if t > 0 else 1 - tail


def oracle_williams(r12, r13, r23, n):
    """Independent high-precision evaluation of the Williams statistic."""
    r12, r13, r23 = mp.mpf(r12), mp.mpf(r13), mp.mpf(r23)
    det = 1 - r12 ** 2 - r13 ** 2 - r23 ** 2 + 2 * r12 * r13 * r23
    rbar = (r12 + r13) / 2
    t = (r12 - r13) * mp.sqrt(
        (n - 1) * (1 + r23)
        / (2 * det * (n - 1) / (n - 3) + rbar ** 2 * (1 - r23) ** 3)
    )
    return float(t), float(mp_t_sf(t, n - 3))


def oracle_cider(hyp, refs, pool, sigma=6.0):
    """Brute-force tf-idf cosine over an explicit n-gram vocabulary."""
    def grams(seq, n):
        return [tuple(seq[i:i + n]) for i in range(len(seq) - n + 1)]

    per_ref = []
    for ref in refs:
        if not set(hyp) & set(ref):
            per_ref.append(0.0)
            continue
        sims = []
        for n in range(1, 5):
            vocab = sorted(set(grams(hyp, n)) | set(grams(ref, n)))
            if not vocab:
                hyp_has = len(grams(hyp, n)) > 0
                ref_has = len(grams(ref, n)) > 0
                sims.append(1.0 if hyp_has == ref_has else 0.0)
                continue
            if not grams(hyp, n) or not grams(ref, n):
                sims.append(0.0)
                continue
            idf = np.array([
                math.log(len(pool) / max(1, sum(1 for doc in pool
                                                if g in set(grams(doc, n)))))
                for g in vocab
            ])
            hv = np.array([grams(hyp, n).count(g) for g in vocab]) * idf
            rv = np.array([grams(ref, n).count(g) for g in vocab]) * idf
            if np.linalg.norm(hv) == 0 or np.linalg.norm(rv) == 0:
                hv = np.array([grams(hyp, n).count(g) for g in vocab], dtype=float)
                rv = np.array([grams(ref, n).count(g) for g in vocab], dtype=float)
            sims.append(float(hv @ rv / (np.linalg.norm(hv) * np.linalg.norm(rv))))
        penalty = math.exp(-((len(hyp) - len(ref)) ** 2) / (2 * sigma ** 2))
        per_ref.append(penalty * sum(sims) / 4)
    return 10.0 * sum(per_ref) / len(per_ref)
