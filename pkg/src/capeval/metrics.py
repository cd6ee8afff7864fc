"""Segment-level caption metrics.

All scoring functions are pure: given the same token sequences (and idf
table for CIDEr) they return the same value, so they can be mapped over
segments in parallel. Ranges: bleu, meteor, sts in [0,1]; cider in [0,10];
mean inverted rank in (0,1].
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import median

from .corpus import Corpus, RankingRun, SystemRun
from .errors import CapevalError
from .text import EMPTY_LEXICON, SynonymLexicon, TokenSeq, stem, tokenize


def _ngrams(tokens: TokenSeq, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def bleu_segment(hyp: TokenSeq, refs: list[TokenSeq], max_n: int = 4) -> float:
    """Sentence BLEU: clipped n-gram precisions for n=1..4 under a geometric
    mean, with add-one smoothing on numerator and denominator for n >= 2,
    times the brevity penalty min(1, e^(1 - r/c)) where r is the reference
    length closest to the hypothesis length (ties toward the shorter).

    Zero unigram overlap still yields 0.
    """
    if not hyp:
        raise ValueError("empty hypothesis")
    refs = [r for r in refs if r]
    if not refs:
        raise ValueError("need at least one nonempty reference")

    log_sum = 0.0
    for n in range(1, max_n + 1):
        hyp_counts = _ngrams(hyp, n)
        total = sum(hyp_counts.values())
        clipped = 0
        if hyp_counts:
            max_ref = Counter()
            for ref in refs:
                for gram, count in _ngrams(ref, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            clipped = sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
        if n == 1:
            if clipped == 0:
                return 0.0
            precision = clipped / total
        else:
            precision = (clipped + 1) / (total + 1)
        log_sum += math.log(precision)

    c = len(hyp)
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    brevity = min(1.0, math.exp(1.0 - r / c))
    return brevity * math.exp(log_sum / max_n)


# ---------------------------------------------------------------------------
# METEOR
# ---------------------------------------------------------------------------

def _align(hyp: TokenSeq, ref: TokenSeq,
           synonyms: SynonymLexicon) -> list[tuple[int, int]]:
    """Greedy unigram alignment in stages: exact, stem, synonym group.

    Within a stage, hypothesis tokens are matched left to right to the
    leftmost still-unmatched reference token with the same key.
    """
    stages = (
        lambda w: w,
        stem,
        synonyms.canonical,
    )
    hyp_free = [True] * len(hyp)
    ref_free = [True] * len(ref)
    pairs: list[tuple[int, int]] = []
    for key in stages:
        ref_keys = [key(w) for w in ref]
        for i, word in enumerate(hyp):
            if not hyp_free[i]:
                continue
            want = key(word)
            for j, rk in enumerate(ref_keys):
                if ref_free[j] and rk == want:
                    pairs.append((i, j))
                    hyp_free[i] = False
                    ref_free[j] = False
                    break
    return sorted(pairs)


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in pairs:  # sorted by hypothesis position
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor_segment(hyp: TokenSeq, ref: TokenSeq,
                   synonyms: SynonymLexicon | None = None,
                   alpha: float = 0.9, beta: float = 3.0,
                   gamma: float = 0.5) -> float:
    """Unigram-alignment F-score with a fragmentation penalty.

    F = P*R / (alpha*P + (1-alpha)*R); penalty = gamma*(chunks/matches)^beta;
    score = F * (1 - penalty), and 0 when nothing aligns.
    """
    if not hyp or not ref:
        raise ValueError("empty input sequence")
    pairs = _align(hyp, ref, synonyms or EMPTY_LEXICON)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(hyp)
    recall = m / len(ref)
    f_mean = (precision * recall) / (alpha * precision + (1 - alpha) * recall)
    penalty = gamma * (_count_chunks(pairs) / m) ** beta
    return f_mean * (1.0 - penalty)


def meteor_best(hyp: TokenSeq, refs: list[TokenSeq],
                synonyms: SynonymLexicon | None = None) -> float:
    """Best single-reference METEOR over a reference set."""
    return max(meteor_segment(hyp, ref, synonyms) for ref in refs if ref)


# ---------------------------------------------------------------------------
# CIDEr
# ---------------------------------------------------------------------------

@dataclass
class NGramProfile:
    """Document frequencies over the reference pool, for CIDEr idf.

    Each reference caption counts as one document; idf(g) =
    log(num_docs / max(1, df(g))).
    """

    max_n: int = 4
    num_docs: int = 0
    df: list[Counter] = field(default_factory=list)

    @classmethod
    def from_references(cls, references: list[TokenSeq],
                        max_n: int = 4) -> "NGramProfile":
        profile = cls(max_n=max_n, num_docs=len(references),
                      df=[Counter() for _ in range(max_n)])
        for tokens in references:
            for n in range(1, max_n + 1):
                for gram in set(_ngrams(tokens, n)):
                    profile.df[n - 1][gram] += 1
        return profile

    def idf(self, gram: tuple) -> float:
        n = len(gram)
        return math.log(self.num_docs / max(1, self.df[n - 1][gram]))


def _cosine(u: dict, v: dict) -> float:
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    dot = sum(x * v[g] for g, x in u.items() if g in v)
    return dot / (nu * nv)


def _sim_n(hyp_counts: Counter, ref_counts: Counter,
           profile: NGramProfile) -> float:
    if not hyp_counts and not ref_counts:
        return 1.0  # n exceeds both lengths: vacuous agreement
    if not hyp_counts or not ref_counts:
        return 0.0
    hyp_vec = {g: c * profile.idf(g) for g, c in hyp_counts.items()}
    ref_vec = {g: c * profile.idf(g) for g, c in ref_counts.items()}
    if any(hyp_vec.values()) and any(ref_vec.values()):
        return _cosine(hyp_vec, ref_vec)
    # all idf weights vanish (every n-gram appears in every pool document):
    # fall back to plain term-frequency cosine
    return _cosine(dict(hyp_counts), dict(ref_counts))


def cider_segment(hyp: TokenSeq, refs: list[TokenSeq], idf: NGramProfile,
                  sigma: float = 6.0) -> float:
    """Consensus tf-idf similarity in [0, 10].

    Per reference and n in 1..4: cosine of tf-idf n-gram vectors, times a
    Gaussian penalty on the token-length difference (sigma=6); averaged
    over n and references and scaled by 10. A reference sharing no token
    type with the hypothesis is orthogonal at every n; where n exceeds both
    lengths the cosine is taken as 1 so that identity scores 10 exactly.
    """
    if not hyp:
        raise ValueError("empty hypothesis")
    refs = [r for r in refs if r]
    if not refs:
        raise ValueError("need at least one nonempty reference")
    hyp_counts = [_ngrams(hyp, n) for n in range(1, idf.max_n + 1)]
    hyp_types = set(hyp)
    total = 0.0
    for ref in refs:
        if not hyp_types & set(ref):
            continue
        penalty = math.exp(-((len(hyp) - len(ref)) ** 2) / (2.0 * sigma ** 2))
        sims = [
            _sim_n(hyp_counts[n - 1], _ngrams(ref, n), idf)
            for n in range(1, idf.max_n + 1)
        ]
        total += penalty * sum(sims) / idf.max_n
    return 10.0 * total / len(refs)


# ---------------------------------------------------------------------------
# Lexical STS
# ---------------------------------------------------------------------------

def sts_lexical(s1: TokenSeq, s2: TokenSeq,
                synonyms: SynonymLexicon | None = None) -> float:
    """Cosine over binary token-type vectors after synonym canonicalization.

    A declared approximation of semantic similarity; symmetric by
    construction.
    """
    if not s1 or not s2:
        raise ValueError("empty input sequence")
    lex = synonyms or EMPTY_LEXICON
    t1 = {lex.canonical(w) for w in s1}
    t2 = {lex.canonical(w) for w in s2}
    overlap = len(t1 & t2)
    if overlap == 0:
        return 0.0
    return overlap / math.sqrt(len(t1) * len(t2))


# ---------------------------------------------------------------------------
# Mean inverted rank
# ---------------------------------------------------------------------------

def correct_ranks(run: RankingRun, truth: dict[str, str]) -> dict[str, int]:
    """Per-video 1-based rank of the correct caption in the run's list."""
    out: dict[str, int] = {}
    for video_id, correct in truth.items():
        ranking = run.rankings.get(video_id)
        if ranking is None:
            raise CapevalError(f"run {run.run_id!r} has no ranking for video {video_id!r}")
        try:
            out[video_id] = ranking.index(correct) + 1
        except ValueError:
            raise CapevalError(
                f"correct caption {correct!r} missing from ranking for video {video_id!r}"
            ) from None
    return out


def inverted_ranks(run: RankingRun, truth: dict[str, str]) -> dict[str, float]:
    """Per-video 1/rank of the correct caption in the run's ranked list."""
    return {v: 1.0 / r for v, r in correct_ranks(run, truth).items()}


def mean_inverted_rank(run: RankingRun, truth: dict[str, str]) -> float:
    ranks = correct_ranks(run, truth)
    if not ranks:
        raise CapevalError("empty truth mapping")
    # exact rational mean: uniform-rank inputs give exact float results
    total = sum((Fraction(1, r) for r in ranks.values()), start=Fraction(0))
    return float(total / len(ranks))


# ---------------------------------------------------------------------------
# Cross-reference STS and full metric reports
# ---------------------------------------------------------------------------

@dataclass
class CrossSetResult:
    per_video: dict[str, float]
    median: float
    histogram: list[int]  # ten buckets over [0, 1]
    skipped: list[str]


def cross_reference_sts(corpus: Corpus, set_a: str = "A", set_b: str = "B",
                        synonyms: SynonymLexicon | None = None) -> CrossSetResult:
    """Similarity between the two reference captions of every video."""
    if set_a not in corpus.sets or set_b not in corpus.sets:
        raise CapevalError(f"corpus lacks reference set {set_a!r} or {set_b!r}")
    per_video: dict[str, float] = {}
    skipped: list[str] = []
    for video_id in sorted(corpus.videos):
        a = corpus.sets[set_a].get(video_id)
        b = corpus.sets[set_b].get(video_id)
        if a is None or b is None:
            skipped.append(video_id)
            continue
        per_video[video_id] = sts_lexical(a.tokens(), b.tokens(), synonyms)
    if not per_video:
        raise CapevalError("no video has captions in both sets")
    histogram = [0] * 10
    for value in per_video.values():
        histogram[min(9, int(value * 10))] += 1
    return CrossSetResult(
        per_video=per_video,
        median=median(per_video.values()),
        histogram=histogram,
        skipped=skipped,
    )


METRIC_NAMES = ("bleu", "meteor", "cider", "sts")


@dataclass
class SegmentScore:
    run_id: str
    video_id: str
    bleu: float
    meteor: float
    cider: float
    sts: float


@dataclass
class MetricReport:
    segments: list[SegmentScore]
    means: dict[str, dict[str, float]]  # run_id -> metric -> mean

    def run_means(self, metric: str) -> dict[str, float]:
        return {run_id: values[metric] for run_id, values in self.means.items()}


def score_runs(corpus: Corpus, runs: list[SystemRun],
               synonyms: SynonymLexicon | None = None) -> MetricReport:
    """Score every (run, video) segment against the corpus reference sets.

    BLEU and CIDEr use all references jointly; METEOR and STS take the best
    single reference. The CIDEr idf pool is the full set of human reference
    captions, fixed before any run is scored.
    """
    ref_tokens = {
        video_id: [c.tokens() for c in corpus.references_for(video_id)]
        for video_id in corpus.videos
    }
    idf = NGramProfile.from_references(
        [c.tokens() for c in corpus.reference_captions()]
    )
    segments: list[SegmentScore] = []
    means: dict[str, dict[str, float]] = {}
    for run in runs:
        sums = dict.fromkeys(METRIC_NAMES, 0.0)
        count = 0
        for video_id in sorted(run.captions):
            refs = ref_tokens.get(video_id, [])
            if not refs:
                continue
            hyp = tokenize(run.captions[video_id])
            seg = SegmentScore(
                run_id=run.run_id,
                video_id=video_id,
                bleu=bleu_segment(hyp, refs),
                meteor=meteor_best(hyp, refs, synonyms),
                cider=cider_segment(hyp, refs, idf),
                sts=max(sts_lexical(hyp, r, synonyms) for r in refs),
            )
            segments.append(seg)
            for name in METRIC_NAMES:
                sums[name] += getattr(seg, name)
            count += 1
        if count == 0:
            raise CapevalError(f"run {run.run_id!r} covers no corpus video")
        means[run.run_id] = {name: sums[name] / count for name in METRIC_NAMES}
    return MetricReport(segments=segments, means=means)


def write_metric_report(report: MetricReport, path: str,
                        header: list[str] | None = None) -> None:
    """Tab-separated segment table plus a per-run summary block."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in header or []:
            fh.write(line + "\n")
        fh.write("run_id\tvideo_id\tbleu\tmeteor\tcider\tsts\n")
        for seg in report.segments:
            fh.write(
                f"{seg.run_id}\t{seg.video_id}\t{seg.bleu:.6f}\t"
                f"{seg.meteor:.6f}\t{seg.cider:.6f}\t{seg.sts:.6f}\n"
            )
        fh.write("# summary: corpus-level means per run\n")
        for run_id in sorted(report.means):
            values = report.means[run_id]
            fh.write(
                f"# mean\t{run_id}\t{values['bleu']:.6f}\t{values['meteor']:.6f}\t"
                f"{values['cider']:.6f}\t{values['sts']:.6f}\n"
            )


def write_metric_report_json(report: MetricReport, path: str,
                             meta: dict | None = None) -> None:
    payload = {
        "_meta": meta or {},
        "segments": [seg.__dict__ for seg in report.segments],
        "means": report.means,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
