"""Sentence tokenization, Porter stemming, and synonym lexicons.

Everything downstream of this module works on token tuples, never raw
strings, so the tokenization rules live in exactly one place.
"""

from __future__ import annotations

import functools
import re
from typing import Iterable

from .errors import EmptyCaptionError

TokenSeq = tuple[str, ...]

_EDGE_PUNCT = re.compile(r"^\W+|\W+$")


@functools.lru_cache(maxsize=1 << 16)
def tokenize(text: str) -> TokenSeq:
    """Lowercase and split a sentence into word tokens.

    Punctuation stuck to word edges is split off and dropped; word-internal
    punctuation (apostrophes, hyphens) is kept. Results are cached, so
    repeated tokenization of the same caption is free.

    Raises EmptyCaptionError if nothing but punctuation remains.
    """
    tokens = []
    for chunk in text.lower().split():
        word = _EDGE_PUNCT.sub("", chunk)
        if word:
            tokens.append(word)
    if not tokens:
        raise EmptyCaptionError(f"caption has no word tokens: {text!r}")
    return tuple(tokens)


class PorterStemmer:
    """Classic Porter suffix-stripping stemmer.

    Implements the standard five-step algorithm, including the common
    LOGI -> LOG addition. Words of length <= 2 are returned unchanged.
    """

    _VOWELS = frozenset("aeiou")

    def stem(self, word: str) -> str:
        if len(word) <= 2:
            return word
        w = self._step1a(word)
        w = self._step1b(w)
        w = self._step1c(w)
        w = self._step2(w)
        w = self._step3(w)
        w = self._step4(w)
        w = self._step5(w)
        return w

    # -- character classes ------------------------------------------------

    def _cons(self, w: str, i: int) -> bool:
        ch = w[i]
        if ch in self._VOWELS:
            return False
        if ch == "y":
            return i == 0 or not self._cons(w, i - 1)
        return True

    def _measure(self, stem: str) -> int:
        # number of VC alternations in [C](VC)^m[V]
        m = 0
        prev_vowel = False
        for i in range(len(stem)):
            if self._cons(stem, i):
                if prev_vowel:
                    m += 1
                prev_vowel = False
            else:
                prev_vowel = True
        return m

    def _has_vowel(self, stem: str) -> bool:
        return any(not self._cons(stem, i) for i in range(len(stem)))

    def _double_cons(self, stem: str) -> bool:
        return (
            len(stem) >= 2
            and stem[-1] == stem[-2]
            and self._cons(stem, len(stem) - 1)
        )

    def _cvc(self, stem: str) -> bool:
        # consonant-vowel-consonant ending, last consonant not w, x or y
        if len(stem) < 3:
            return False
        n = len(stem)
        return (
            self._cons(stem, n - 3)
            and not self._cons(stem, n - 2)
            and self._cons(stem, n - 1)
            and stem[-1] not in "wxy"
        )

    # -- steps -------------------------------------------------------------

    def _step1a(self, w: str) -> str:
        if w.endswith("sses"):
            return w[:-2]
        if w.endswith("ies"):
            return w[:-2]
        if w.endswith("ss"):
            return w
        if w.endswith("s"):
            return w[:-1]
        return w

    def _step1b(self, w: str) -> str:
        if w.endswith("eed"):
            if self._measure(w[:-3]) > 0:
                return w[:-1]
            return w
        if w.endswith("ed") and self._has_vowel(w[:-2]):
            return self._step1b_tidy(w[:-2])
        if w.endswith("ing") and self._has_vowel(w[:-3]):
            return self._step1b_tidy(w[:-3])
        return w

    def _step1b_tidy(self, w: str) -> str:
        if w.endswith(("at", "bl", "iz")):
            return w + "e"
        if self._double_cons(w) and w[-1] not in "lsz":
            return w[:-1]
        if self._measure(w) == 1 and self._cvc(w):
            return w + "e"
        return w

    def _step1c(self, w: str) -> str:
        if w.endswith("y") and self._has_vowel(w[:-1]):
            return w[:-1] + "i"
        return w

    _STEP2 = (
        ("ational", "ate"), ("ization", "ize"), ("iveness", "ive"),
        ("fulness", "ful"), ("ousness", "ous"), ("tional", "tion"),
        ("biliti", "ble"), ("entli", "ent"), ("ousli", "ous"),
        ("ation", "ate"), ("alism", "al"), ("aliti", "al"),
        ("iviti", "ive"), ("enci", "ence"), ("anci", "ance"),
        ("izer", "ize"), ("abli", "able"), ("alli", "al"),
        ("ator", "ate"), ("logi", "log"), ("eli", "e"),
    )

    _STEP3 = (
        ("icate", "ic"), ("ative", ""), ("alize", "al"),
        ("iciti", "ic"), ("ical", "ic"), ("ness", ""), ("ful", ""),
    )

    _STEP4 = (
        "ement", "ance", "ence", "able", "ible", "ment",
        "ant", "ent", "ion", "ism", "ate", "iti", "ous", "ive", "ize",
        "al", "er", "ic", "ou",
    )

    def _step2(self, w: str) -> str:
        for suffix, repl in self._STEP2:
            if w.endswith(suffix):
                stem = w[: -len(suffix)]
                if self._measure(stem) > 0:
                    return stem + repl
                return w  # longest match decides; no fallthrough
        return w

    def _step3(self, w: str) -> str:
        for suffix, repl in self._STEP3:
            if w.endswith(suffix):
                stem = w[: -len(suffix)]
                if self._measure(stem) > 0:
                    return stem + repl
                return w
        return w

    def _step4(self, w: str) -> str:
        for suffix in self._STEP4:
            if w.endswith(suffix):
                stem = w[: -len(suffix)]
                if self._measure(stem) > 1:
                    if suffix == "ion" and not stem.endswith(("s", "t")):
                        return w
                    return stem
                return w
        return w

    def _step5(self, w: str) -> str:
        if w.endswith("e"):
            stem = w[:-1]
            m = self._measure(stem)
            if m > 1 or (m == 1 and not self._cvc(stem)):
                w = stem
        if w.endswith("l") and self._double_cons(w) and self._measure(w) > 1:
            w = w[:-1]
        return w


_STEMMER = PorterStemmer()


@functools.lru_cache(maxsize=65536)
def stem(word: str) -> str:
    """Cached module-level stemming helper."""
    return _STEMMER.stem(word)


class SynonymLexicon:
    """Equivalence groups of interchangeable words.

    File format: one group per line, comma-separated lowercase words;
    blank lines and lines starting with '#' are ignored. Overlapping
    groups are merged; the representative is the first word seen.
    """

    def __init__(self, groups: Iterable[Iterable[str]] = ()):
        self._rep: dict[str, str] = {}
        for group in groups:
            self.add_group(group)

    @classmethod
    def load(cls, path: str) -> "SynonymLexicon":
        lexicon = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                words = [w.strip().lower() for w in line.split(",") if w.strip()]
                if len(words) >= 2:
                    lexicon.add_group(words)
        return lexicon

    def add_group(self, words: Iterable[str]) -> None:
        words = [w.lower() for w in words]
        rep = next((self._rep[w] for w in words if w in self._rep), None)
        if rep is None:
            rep = words[0]
        for w in words:
            old = self._rep.get(w)
            if old is not None and old != rep:
                # merge: redirect the old group onto the new representative
                for key, value in list(self._rep.items()):
                    if value == old:
                        self._rep[key] = rep
            self._rep[w] = rep

    def canonical(self, word: str) -> str:
        return self._rep.get(word, word)

    def same_group(self, a: str, b: str) -> bool:
        # representatives are group members, so unknown words can never
        # collide with a group they are not part of
        return self.canonical(a) == self.canonical(b)

    def __len__(self) -> int:
        return len(self._rep)


EMPTY_LEXICON = SynonymLexicon()
