"""Quality-control caption degradation.

A degraded caption replaces a contiguous span of the origin caption with an
equally long contiguous window from another video's caption, so the result
stays superficially fluent and keeps the origin's token length. The span is
non-initial and non-final whenever the caption is long enough; otherwise the
constraint is relaxed and the record flagged.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Caption
from .errors import CapevalError, MalformedLineError, NoEligibleDonorError
from .rngutil import GENERATOR_NAME, substream
from .text import tokenize

# caption length band -> number of words replaced
RULE_BANDS = ((1, 1, 1), (2, 5, 2), (6, 8, 3), (9, 15, 4), (16, 20, 5))


def words_to_replace(n: int) -> int:
    """Replacement count for a caption of n tokens; floor(n/4) above 20."""
    if n < 1:
        raise ValueError("caption length must be >= 1")
    for lo, hi, k in RULE_BANDS:
        if lo <= n <= hi:
            return k
    return n // 4


@dataclass(frozen=True)
class DegradedCaption:
    caption_id: str
    origin_caption_id: str
    donor_caption_id: str
    video_id: str
    span_start: int
    span_len: int
    text: str
    relaxed_span: bool  # non-initial/non-final constraint was unsatisfiable


def degrade(origin: Caption, donor_pool: Sequence[Caption],
            seed: int) -> DegradedCaption:
    """Replace a span of `origin` with a window from a random donor.

    Deterministic for fixed (origin, donor_pool, seed): the per-caption
    stream is derived from the seed and the origin caption id.
    """
    tokens = list(origin.tokens())
    n = len(tokens)
    k = words_to_replace(n)

    donors = [d for d in donor_pool
              if d.video_id != origin.video_id and len(d.tokens()) >= k]
    if not donors:
        raise NoEligibleDonorError(
            f"no donor with >= {k} tokens from another video for "
            f"{origin.caption_id!r}"
        )

    rng = substream(seed, origin.caption_id)
    donor = donors[int(rng.integers(len(donors)))]
    donor_tokens = list(donor.tokens())
    window_start = int(rng.integers(len(donor_tokens) - k + 1))
    window = donor_tokens[window_start:window_start + k]

    relaxed = n < k + 2
    if relaxed:
        span_start = int(rng.integers(0, n - k + 1))
    else:
        # keep the first and last origin token: start in [1, n-1-k]
        span_start = int(rng.integers(1, n - k))

    degraded_tokens = tokens[:span_start] + window + tokens[span_start + k:]
    return DegradedCaption(
        caption_id=f"degraded:{origin.caption_id}",
        origin_caption_id=origin.caption_id,
        donor_caption_id=donor.caption_id,
        video_id=origin.video_id,
        span_start=span_start,
        span_len=k,
        text=" ".join(degraded_tokens),
        relaxed_span=relaxed,
    )


@dataclass
class DegradedSet:
    pairs: list[tuple[Caption, DegradedCaption]]
    seed: int
    generator: str = GENERATOR_NAME

    def __len__(self) -> int:
        return len(self.pairs)


def degrade_set(originals: Sequence[Caption], seed: int,
                donor_pool: Sequence[Caption] | None = None) -> DegradedSet:
    """Degrade every original against the pool (the originals themselves by
    default), preserving the (origin, degraded) pairing for QC scoring."""
    if not originals:
        raise CapevalError("cannot degrade an empty caption set")
    pool = originals if donor_pool is None else donor_pool
    pairs = [(origin, degrade(origin, pool, seed)) for origin in originals]
    return DegradedSet(pairs=pairs, seed=seed)


def write_degraded_set(degraded: DegradedSet, path: str,
                       header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write(f"# seed: {degraded.seed}\n")
        fh.write(f"# rng: {degraded.generator}\n")
        for _, item in degraded.pairs:
            fh.write(
                f"{item.caption_id}\t{item.origin_caption_id}\t"
                f"{item.donor_caption_id}\t{item.span_start}\t"
                f"{item.span_len}\t{item.text}\n"
            )


def load_degraded_set(path: str,
                      captions: dict[str, Caption]) -> list[tuple[Caption, DegradedCaption]]:
    """Read a degraded-set file back, resolving origins against the corpus."""
    pairs: list[tuple[Caption, DegradedCaption]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise MalformedLineError(path, line_no, "expected 6 fields")
            cid, origin_id, donor_id, start, length, text = parts
            origin = captions.get(origin_id)
            if origin is None:
                raise MalformedLineError(
                    path, line_no, f"unknown origin caption {origin_id!r}"
                )
            n = len(tokenize(text))
            span_start, span_len = int(start), int(length)
            item = DegradedCaption(
                caption_id=cid,
                origin_caption_id=origin_id,
                donor_caption_id=donor_id,
                video_id=origin.video_id,
                span_start=span_start,
                span_len=span_len,
                text=text,
                relaxed_span=span_start == 0 or span_start + span_len == n,
            )
            pairs.append((origin, item))
    return pairs
