"""Videos, reference caption sets, and system runs.

File formats (UTF-8, tab-separated, '#' comment lines ignored):

  captions file:  caption_id <TAB> video_id <TAB> set_label <TAB> text
  videos file:    video_id <TAB> url            (url may be empty)
  run file:       video_id <TAB> caption text               (description)
                  video_id <TAB> cid_1,cid_2,...            (ranking)

A corpus is immutable after load; persisting and reloading yields an
identical corpus.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator

from .errors import (
    CapevalError,
    DanglingReferenceError,
    DuplicateIdError,
    EmptyCaptionError,
    MalformedLineError,
)
from .text import TokenSeq, tokenize


@dataclass(frozen=True)
class VideoRef:
    video_id: str
    url: str = ""


@dataclass(frozen=True)
class Caption:
    caption_id: str
    video_id: str
    text: str
    source: str  # "human-<set>", "system:<run_id>", "degraded:<origin id>"

    def tokens(self) -> TokenSeq:
        return tokenize(self.text)


@dataclass(frozen=True)
class SystemRun:
    run_id: str
    group_id: str
    captions: dict[str, str]  # video_id -> caption text

    def __len__(self) -> int:
        return len(self.captions)


@dataclass(frozen=True)
class RankingRun:
    run_id: str
    rankings: dict[str, tuple[str, ...]]  # video_id -> caption ids, rank 1 first

    def __len__(self) -> int:
        return len(self.rankings)


@dataclass
class Corpus:
    """Videos plus >=1 reference caption sets, each keyed by set label."""

    videos: dict[str, VideoRef]
    captions: dict[str, Caption] = field(default_factory=dict)
    sets: dict[str, dict[str, Caption]] = field(default_factory=dict)
    # sets[label][video_id] -> Caption

    def set_labels(self) -> list[str]:
        return sorted(self.sets)

    def reference_captions(self) -> list[Caption]:
        """All reference captions, the CIDEr idf pool."""
        return [c for label in self.set_labels() for c in self.sets[label].values()]

    def references_for(self, video_id: str) -> list[Caption]:
        return [
            self.sets[label][video_id]
            for label in self.set_labels()
            if video_id in self.sets[label]
        ]

    def counts_by_source(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for cap in self.captions.values():
            counts[cap.source] = counts.get(cap.source, 0) + 1
        return counts


def _data_lines(path: str) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield line_no, line


def load_corpus(captions_path: str, videos_path: str) -> Corpus:
    """Load and validate a corpus from its two text files."""
    videos: dict[str, VideoRef] = {}
    for line_no, line in _data_lines(videos_path):
        parts = line.split("\t")
        if len(parts) not in (1, 2) or not parts[0]:
            raise MalformedLineError(videos_path, line_no, "expected video_id<TAB>url")
        video_id = parts[0]
        if video_id in videos:
            raise DuplicateIdError(f"duplicate video_id {video_id!r}")
        videos[video_id] = VideoRef(video_id, parts[1] if len(parts) == 2 else "")

    corpus = Corpus(videos=videos)
    n_lines = 0
    for line_no, line in _data_lines(captions_path):
        n_lines += 1
        parts = line.split("\t")
        if len(parts) != 4:
            raise MalformedLineError(
                captions_path, line_no,
                f"expected 4 tab-separated fields, got {len(parts)}",
            )
        caption_id, video_id, label, text = parts
        source = f"human-{label}"
        if not caption_id:
            caption_id = f"{source}:{video_id}"
        if caption_id in corpus.captions:
            raise DuplicateIdError(f"duplicate caption_id {caption_id!r}")
        if video_id not in videos:
            raise DanglingReferenceError(
                f"caption {caption_id!r} references unknown video {video_id!r}"
            )
        if not text.strip():
            raise MalformedLineError(captions_path, line_no, "empty caption text")
        tokenize(text)  # raises EmptyCaptionError on punctuation-only text
        cap = Caption(caption_id, video_id, text, source)
        corpus.captions[caption_id] = cap
        per_set = corpus.sets.setdefault(label, {})
        if video_id in per_set:
            raise DuplicateIdError(
                f"set {label!r} has two captions for video {video_id!r}"
            )
        per_set[video_id] = cap
    if n_lines == 0:
        raise CapevalError(f"no captions in {captions_path}")
    return corpus


def load_run(path: str, kind: str, corpus: Corpus,
             candidate_pool: set[str] | None = None,
             run_id: str | None = None,
             group_id: str = "") -> SystemRun | RankingRun:
    """Load a description or ranking run and validate it against the corpus.

    For ranking runs every per-video list must be a permutation of the
    candidate pool (inferred as the union of listed ids when not given).
    """
    if kind not in ("description", "ranking"):
        raise ValueError(f"unknown run kind {kind!r}")
    if run_id is None:
        run_id = os.path.splitext(os.path.basename(path))[0]

    if kind == "description":
        captions: dict[str, str] = {}
        for line_no, line in _data_lines(path):
            parts = line.split("\t")
            if len(parts) != 2:
                raise MalformedLineError(path, line_no, "expected video_id<TAB>caption")
            video_id, text = parts
            if video_id not in corpus.videos:
                raise DanglingReferenceError(
                    f"{path}:{line_no}: unknown video {video_id!r}"
                )
            if video_id in captions:
                raise DuplicateIdError(
                    f"{path}:{line_no}: video {video_id!r} covered twice"
                )
            if not text.strip():
                raise EmptyCaptionError(f"{path}:{line_no}: empty caption text")
            captions[video_id] = text
        return SystemRun(run_id=run_id, group_id=group_id, captions=captions)

    rankings: dict[str, tuple[str, ...]] = {}
    for line_no, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedLineError(path, line_no, "expected video_id<TAB>id,id,...")
        video_id, id_list = parts
        if video_id not in corpus.videos:
            raise DanglingReferenceError(f"{path}:{line_no}: unknown video {video_id!r}")
        if video_id in rankings:
            raise DuplicateIdError(f"{path}:{line_no}: video {video_id!r} covered twice")
        ids = tuple(c.strip() for c in id_list.split(",") if c.strip())
        if len(set(ids)) != len(ids):
            raise DuplicateIdError(
                f"{path}:{line_no}: duplicate caption ids in ranking for {video_id!r}"
            )
        rankings[video_id] = ids

    pool = candidate_pool if candidate_pool is not None else {
        cid for ids in rankings.values() for cid in ids
    }
    for video_id, ids in rankings.items():
        if set(ids) != pool:
            missing = sorted(pool - set(ids))[:5]
            extra = sorted(set(ids) - pool)[:5]
            raise CapevalError(
                f"ranking for video {video_id!r} is not a permutation of the "
                f"candidate pool (missing {missing}, unexpected {extra})"
            )
    return RankingRun(run_id=run_id, rankings=rankings)


def save_corpus(corpus: Corpus, out_dir: str) -> tuple[str, str]:
    """Persist a corpus as the same text formats used for input."""
    os.makedirs(out_dir, exist_ok=True)
    videos_path = os.path.join(out_dir, "videos.tsv")
    captions_path = os.path.join(out_dir, "captions.tsv")
    with open(videos_path, "w", encoding="utf-8") as fh:
        for video in sorted(corpus.videos.values(), key=lambda v: v.video_id):
            fh.write(f"{video.video_id}\t{video.url}\n")
    with open(captions_path, "w", encoding="utf-8") as fh:
        for label in corpus.set_labels():
            for video_id in sorted(corpus.sets[label]):
                cap = corpus.sets[label][video_id]
                fh.write(f"{cap.caption_id}\t{cap.video_id}\t{label}\t{cap.text}\n")
    return captions_path, videos_path


def save_run(run: SystemRun, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for video_id in sorted(run.captions):
            fh.write(f"{video_id}\t{run.captions[video_id]}\n")
