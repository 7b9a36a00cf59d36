"""Probable-word search: every dictionary word inside a deciphered letter stream.

Two engines share one ``Dictionary``:

* :class:`AhoCorasick` backs :func:`find_words` and yields ``WordMatch``
  objects, one pass over the stream;
* :meth:`Dictionary.match_arrays` is a numpy rolling-hash scan that returns
  ``(starts, lengths)`` arrays; the null model uses it because it runs
  hundreds of thousands of searches.

Both are checked against each other and against naive scanning in the tests.
"""

from __future__ import annotations

import os
import string
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from dnacipher.errors import EmptyDictionary

DEFAULT_MIN_LEN = 2
ALPHABET = frozenset(string.ascii_uppercase)
# A..Z -> 0..25, anything else (the '?' placeholder) -> 26
_LUT = np.full(256, 26, dtype=np.uint64)
_LUT[np.frombuffer(string.ascii_uppercase.encode(), dtype=np.uint8)] = np.arange(26, dtype=np.uint64)
_BASE = np.uint64(27)
_EXACT_MAX = 13  # 27**13 < 2**64


@dataclass(frozen=True, order=True)
class WordMatch:
    start: int
    word: str
    key_id: int = 0

    @property
    def end(self) -> int:
        return self.start + len(self.word)


class AhoCorasick:
    """Character automaton with failure links over uppercase words."""

    def __init__(self, words):
        self.goto: list[dict[str, int]] = [{}]
        self.fail: list[int] = [0]
        self.out: list[tuple[str, ...]] = [()]
        for w in words:
            self._insert(w)
        self._link()

    def _insert(self, word: str) -> None:
        node = 0
        for ch in word:
            nxt = self.goto[node].get(ch)
            if nxt is None:
                nxt = len(self.goto)
                self.goto.append({})
                self.fail.append(0)
                self.out.append(())
                self.goto[node][ch] = nxt
            node = nxt
        self.out[node] = self.out[node] + (word,)

    def _link(self) -> None:
        queue = deque(self.goto[0].values())
        while queue:
            node = queue.popleft()
            for ch, child in self.goto[node].items():
                queue.append(child)
                f = self.fail[node]
                while f and ch not in self.goto[f]:
                    f = self.fail[f]
                target = self.goto[f].get(ch, 0)
                self.fail[child] = target if target != child else 0
                self.out[child] = self.out[child] + self.out[self.fail[child]]

    def iter_matches(self, text: str):
        """Yield ``(end_index_exclusive, word)`` for every occurrence."""
        goto, fail, out = self.goto, self.fail, self.out
        node = 0
        for i, ch in enumerate(text):
            while node and ch not in goto[node]:
                node = fail[node]
            node = goto[node].get(ch, 0)
            for word in out[node]:
                yield i + 1, word


class Dictionary:
    """An immutable uppercase word set with precomputed search structures."""

    def __init__(self, words, min_len: int = DEFAULT_MIN_LEN, rejected: int = 0, source: str = ""):
        self.words = frozenset(w for w in words if len(w) >= min_len)
        self.min_len = min_len
        self.rejected = rejected
        self.source = source
        if not self.words:
            raise EmptyDictionary("dictionary holds no usable words")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self.words

    @cached_property
    def automaton(self) -> AhoCorasick:
        return AhoCorasick(sorted(self.words))

    @cached_property
    def _tables(self) -> tuple[dict[int, np.ndarray], dict[int, np.ndarray]]:
        """Sorted hash arrays per length: whole words, and proper prefixes of longer words."""
        words: dict[int, set[int]] = {}
        prefixes: dict[int, set[int]] = {}
        for w in self.words:
            h = 0
            for i, ch in enumerate(w, start=1):
                h = (h * 27 + ord(ch) - 65) % (1 << 64)
                if i < len(w):
                    prefixes.setdefault(i, set()).add(h)
            words.setdefault(len(w), set()).add(h)

        def pack(d):
            return {n: np.array(sorted(hs), dtype=np.uint64) for n, hs in d.items()}

        return pack(words), pack(prefixes)

    def match_arrays(self, letters: str) -> tuple[np.ndarray, np.ndarray]:
        """All occurrences as ``(starts, lengths)``, sorted by start then descending length.

        Window hashes are extended one letter at a time, and only windows that
        are still a prefix of some word survive to the next length.
        """
        empty = np.zeros(0, dtype=np.int64)
        n = len(letters)
        if n == 0:
            return empty, empty
        words, prefixes = self._tables
        max_len = max(words)
        codes = _LUT[np.frombuffer(letters.encode("ascii"), dtype=np.uint8)]
        alive = np.flatnonzero(codes != 26)
        h = codes[alive]
        starts_all, lens_all = [], []
        with np.errstate(over="ignore"):
            for length in range(1, max_len + 1):
                if length > 1:
                    inside = alive + length - 1 < n
                    alive, h = alive[inside], h[inside]
                    nxt = codes[alive + length - 1]
                    ok = nxt != 26
                    alive, h = alive[ok], h[ok] * _BASE + nxt[ok]
                if len(alive) == 0:
                    break
                table = words.get(length)
                if table is not None:
                    hit = alive[_member(table, h)]
                    if length > _EXACT_MAX:
                        hit = np.array([i for i in hit if letters[i : i + length] in self.words], dtype=np.int64)
                    starts_all.append(hit)
                    lens_all.append(np.full(len(hit), length, dtype=np.int64))
                table = prefixes.get(length)
                if table is None:
                    break
                keep = _member(table, h)
                alive, h = alive[keep], h[keep]
        if not starts_all:
            return empty, empty
        starts = np.concatenate(starts_all).astype(np.int64)
        lengths = np.concatenate(lens_all)
        order = np.lexsort((-lengths, starts))
        return starts[order], lengths[order]


def _member(table: np.ndarray, values: np.ndarray) -> np.ndarray:
    pos = np.searchsorted(table, values)
    pos[pos == len(table)] = 0
    return table[pos] == values


def _clean(lines, min_len: int, source: str) -> Dictionary:
    words, rejected = set(), 0
    for line in lines:
        w = line.strip().upper()
        if not w or w.startswith("#"):
            continue
        if not set(w) <= ALPHABET:
            rejected += 1
            continue
        words.add(w)
    if not words:
        raise EmptyDictionary(f"no words in {source or 'input'}")
    return Dictionary(words, min_len=min_len, rejected=rejected, source=source)


def load_dictionary(path: str | os.PathLike, min_len: int = DEFAULT_MIN_LEN) -> Dictionary:
    """One word per line; uppercased, deduplicated, non A-Z words rejected."""
    path = Path(path)
    return _clean(path.read_text(encoding="utf-8").splitlines(), min_len, str(path))


def words_from_lines(lines, min_len: int = DEFAULT_MIN_LEN) -> Dictionary:
    return _clean(lines, min_len, "<lines>")


def default_dictionary(min_len: int = DEFAULT_MIN_LEN) -> Dictionary:
    """The bundled list of ~1,000 common English words."""
    text = resources.files("dnacipher.data").joinpath("common_words.txt").read_text(encoding="utf-8")
    return _clean(text.splitlines(), min_len, "common_words (bundled)")


def find_words(letters: str, dictionary: Dictionary, key_id: int = 0) -> list[WordMatch]:
    """Every dictionary word occurring in ``letters``, overlaps included."""
    matches = [
        WordMatch(end - len(word), word, key_id) for end, word in dictionary.automaton.iter_matches(letters)
    ]
    matches.sort(key=lambda m: (m.start, -len(m.word)))
    return matches


@dataclass
class YieldStats:
    key_id: int
    letters: int
    total: int
    by_length: dict[int, int] = field(default_factory=dict)
    covered_fraction: float = 0.0
    longest: str = ""
    per_thousand: float = 0.0

    @property
    def long_matches(self) -> int:
        return sum(c for n, c in self.by_length.items() if n >= 4)

    def as_dict(self) -> dict:
        return {
            "letters": self.letters,
            "total_matches": self.total,
            "matches_by_length": {str(k): v for k, v in sorted(self.by_length.items())},
            "matches_len_ge_4": self.long_matches,
            "covered_fraction": self.covered_fraction,
            "longest": self.longest,
            "per_thousand": self.per_thousand,
        }


def covered_fraction(starts, lengths, n: int) -> float:
    """Fraction of the ``n`` positions lying inside at least one match."""
    if n == 0 or len(starts) == 0:
        return 0.0
    diff = np.zeros(n + 1, dtype=np.int64)
    np.add.at(diff, np.asarray(starts), 1)
    np.add.at(diff, np.asarray(starts) + np.asarray(lengths), -1)
    return float(np.count_nonzero(np.cumsum(diff[:n]))) / n


def yield_statistics(matches: list[WordMatch], letters: str, key_id: int | None = None) -> YieldStats:
    n = len(letters)
    if key_id is None:
        key_id = matches[0].key_id if matches else 0
    by_length: dict[int, int] = {}
    for m in matches:
        by_length[len(m.word)] = by_length.get(len(m.word), 0) + 1
    longest = max(matches, key=lambda m: (len(m.word), -m.start), default=None)
    return YieldStats(
        key_id=key_id,
        letters=n,
        total=len(matches),
        by_length=by_length,
        covered_fraction=covered_fraction([m.start for m in matches], [len(m.word) for m in matches], n),
        longest=longest.word if longest else "",
        per_thousand=1000.0 * len(matches) / n if n else 0.0,
    )


def phrases(matches: list[WordMatch]) -> list[list[WordMatch]]:
    """Runs of at least two abutting matches, taking the longest word at each step."""
    best: dict[int, WordMatch] = {}
    for m in matches:
        if m.start not in best or len(m.word) > len(best[m.start].word):
            best[m.start] = m
    ends = {m.end for m in best.values()}
    runs = []
    reach = 0
    for start in sorted(best):
        if start in ends or start < reach:
            continue
        run = [best[start]]
        while run[-1].end in best:
            run.append(best[run[-1].end])
        if len(run) >= 2:
            runs.append(run)
            reach = run[-1].end
    return runs
