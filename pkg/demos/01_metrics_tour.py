"""Tour of the segment-level caption metrics.

Scores a handful of candidate captions against two reference sentences and
prints the full metric profile for each, then shows mean inverted rank for
a toy matching-and-ranking run.
"""

from capeval.corpus import RankingRun
from capeval.metrics import (
    NGramProfile,
    bleu_segment,
    cider_segment,
    mean_inverted_rank,
    meteor_segment,
    sts_lexical,
)
from capeval.text import SynonymLexicon, tokenize

references = [
    "a toddler and a dog crawl across the living room floor",
    "a baby crawls on the carpet while a dog imitates it",
]
candidates = [
    "a toddler and a dog crawl across the living room floor",  # verbatim
    "a baby and a dog crawl on the floor",                     # close
    "a dog imitating a baby crawling across a room",           # paraphrase
    "a man is talking to a car",                               # unrelated
]

refs = [tokenize(r) for r in references]
idf = NGramProfile.from_references(refs)
synonyms = SynonymLexicon([["toddler", "baby", "infant"], ["carpet", "floor"]])

print(f"{'candidate':<55} {'bleu':>6} {'meteor':>7} {'cider':>6} {'sts':>6}")
for text in candidates:
    hyp = tokenize(text)
    bleu = bleu_segment(hyp, refs)
    meteor = max(meteor_segment(hyp, ref, synonyms) for ref in refs)
    cider = cider_segment(hyp, refs, idf)
    sts = max(sts_lexical(hyp, ref, synonyms) for ref in refs)
    print(f"{text:<55} {bleu:>6.3f} {meteor:>7.3f} {cider:>6.2f} {sts:>6.3f}")

# Matching and ranking: the matcher puts the correct caption at ranks
# 1, 2 and 4 for three videos; the mean inverted rank follows directly.
run = RankingRun("demo", {
    "v1": ("correct1", "b", "c", "d"),
    "v2": ("b", "correct2", "c", "d"),
    "v3": ("b", "c", "d", "correct3"),
})
truth = {"v1": "correct1", "v2": "correct2", "v3": "correct3"}
print(f"\nmean inverted rank for ranks (1, 2, 4): "
      f"{mean_inverted_rank(run, truth):.4f}")
