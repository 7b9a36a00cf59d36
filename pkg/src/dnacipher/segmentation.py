"""Fixed-width segmentation and per-segment base composition.

A segment's composition is the ordered count quadruple over ``base_order``
(``ATGC`` by default). Its combination is the same quadruple sorted
ascending, i.e. a partition of the width into at most four parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations_with_replacement

import numpy as np

from dnacipher.errors import ZeroWidth
from dnacipher.sequence_io import NucleotideSequence

DEFAULT_WIDTH = 10
DEFAULT_BASE_ORDER = "ATGC"


@dataclass(frozen=True)
class Segment:
    index: int
    offset: int
    bases: str


@dataclass(frozen=True)
class CompositionVector:
    counts: tuple[int, int, int, int]

    def __iter__(self):
        return iter(self.counts)

    def __getitem__(self, i):
        return self.counts[i]

    @property
    def width(self) -> int:
        return sum(self.counts)

    def render(self) -> str:
        return render_counts(self.counts)


@dataclass(frozen=True)
class Combination:
    digits: tuple[int, int, int, int]

    def render(self) -> str:
        return render_counts(self.digits)


def render_counts(counts) -> str:
    """``(0, 0, 5, 5) -> "0055"``; hyphenated once any count needs two digits."""
    if all(c <= 9 for c in counts):
        return "".join(str(c) for c in counts)
    return "-".join(str(c) for c in counts)


def _check_base_order(base_order: str) -> str:
    base_order = base_order.upper()
    if sorted(base_order) != sorted("ACGT"):
        raise ValueError(f"base order must be a permutation of ACGT, got {base_order!r}")
    return base_order


def _code_table(base_order: str) -> np.ndarray:
    table = np.full(256, 255, dtype=np.uint8)
    for i, b in enumerate(base_order):
        table[ord(b)] = i
    return table


def encode_bases(bases: str, base_order: str = DEFAULT_BASE_ORDER) -> np.ndarray:
    """Map a base string to small integer codes, index = position in ``base_order``."""
    raw = np.frombuffer(bases.encode("ascii"), dtype=np.uint8)
    return _code_table(_check_base_order(base_order))[raw]


class Segmentation:
    """The segment stream of one sequence.

    ``counts`` is an ``(n_segments, 4)`` integer array of compositions, the
    form every key consumes. ``segments`` materialises ``Segment`` objects on
    demand.
    """

    def __init__(self, bases: str, width: int, base_order: str = DEFAULT_BASE_ORDER, counts=None):
        if width < 1:
            raise ZeroWidth("segment width must be >= 1")
        self.bases = bases
        self.width = width
        self.base_order = _check_base_order(base_order)
        n = len(bases) // width
        self.dropped = len(bases) - n * width
        if counts is None:
            codes = encode_bases(bases[: n * width], self.base_order).astype(np.int64)
            rows = np.repeat(np.arange(n, dtype=np.int64) * 4, width)
            counts = np.bincount(rows + codes, minlength=4 * n).reshape(n, 4)
        self.counts = counts

    def __len__(self) -> int:
        return self.counts.shape[0]

    @cached_property
    def segments(self) -> list[Segment]:
        w = self.width
        return [Segment(i, i * w, self.bases[i * w : (i + 1) * w]) for i in range(len(self))]

    def compositions(self) -> list[CompositionVector]:
        return [CompositionVector(tuple(int(c) for c in row)) for row in self.counts]

    @classmethod
    def from_counts(cls, counts, width: int | None = None, base_order: str = DEFAULT_BASE_ORDER):
        """Build directly from a composition array (no source bases)."""
        counts = np.asarray(counts, dtype=np.int64).reshape(-1, 4)
        if width is None:
            width = int(counts[0].sum()) if len(counts) else DEFAULT_WIDTH
        obj = cls("", width, base_order, counts=counts)
        obj.dropped = 0
        return obj

    @classmethod
    def from_segments(cls, segments, base_order: str = DEFAULT_BASE_ORDER):
        segments = list(segments)
        if not segments:
            raise ValueError("no segments")
        width = len(segments[0].bases)
        return cls("".join(s.bases for s in segments), width, base_order)


def segment(
    seq: NucleotideSequence | str, width: int = DEFAULT_WIDTH, base_order: str = DEFAULT_BASE_ORDER
) -> Segmentation:
    """Cut ``seq`` into ``len // width`` contiguous segments, dropping the tail."""
    bases = seq.bases if isinstance(seq, NucleotideSequence) else seq
    return Segmentation(bases, width, base_order)


def composition(seg: Segment | str, base_order: str = DEFAULT_BASE_ORDER) -> CompositionVector:
    bases = seg.bases if isinstance(seg, Segment) else seg
    return CompositionVector(tuple(bases.count(b) for b in _check_base_order(base_order)))


def canonical(cv) -> Combination:
    return Combination(tuple(sorted(cv)))


@lru_cache(maxsize=None)
def partitions(width: int) -> tuple[tuple[int, int, int, int], ...]:
    """All ascending quadruples summing to ``width``, lexicographically ordered."""
    out = [c for c in combinations_with_replacement(range(width + 1), 4) if sum(c) == width]
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def compositions_of(width: int) -> tuple[tuple[int, int, int, int], ...]:
    """All ordered quadruples of non-negative integers summing to ``width``."""
    out = []
    for a in range(width + 1):
        for b in range(width + 1 - a):
            for c in range(width + 1 - a - b):
                out.append((a, b, c, width - a - b - c))
    return tuple(out)
