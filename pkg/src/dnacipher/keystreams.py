"""The 22 cipher keys: transformations of a segment stream into integer symbols.

Every key consumes a :class:`~dnacipher.segmentation.Segmentation` (or a list
of ``Segment`` objects) and returns a :class:`SymbolStream`. Keys fall into
five families:

* per-segment symbols (1, 21, 22) and per-segment prime lists (2);
* marker distances (3-9, 11, 12, 18, 19): gaps between segments that satisfy
  a predicate;
* digit distances (10, 13-17): gaps between occurrences of one digit in the
  concatenated composition digits;
* next-higher distances (20).

All computations are vectorised over the ``(n, 4)`` composition array.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Callable

import numpy as np

from dnacipher.errors import CountOverflow, UnknownKey
from dnacipher.segmentation import (
    DEFAULT_BASE_ORDER,
    Segment,
    Segmentation,
    compositions_of,
    partitions,
    render_counts,
)

log = logging.getLogger(__name__)

# at most 4 one-digit and 4*3 two-digit candidates per segment
PRIME_SLOTS = 16

DEFAULT_LOOPS = frozenset({(2, 0, 3, 5), (2, 0, 8, 0), (1, 0, 3, 6), (0, 5, 0, 5)})


@dataclass(eq=False)
class SymbolStream:
    key_id: int
    symbols: np.ndarray
    positions: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=np.int64)
        self.positions = np.asarray(self.positions, dtype=np.int64)
        if self.symbols.shape != self.positions.shape:
            raise ValueError("symbols and positions differ in length")
        if len(self.positions) > 1 and not np.all(np.diff(self.positions) > 0):
            raise ValueError("positions must be strictly increasing")

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolStream):
            return NotImplemented
        return (
            self.key_id == other.key_id
            and np.array_equal(self.symbols, other.symbols)
            and np.array_equal(self.positions, other.positions)
            and self.meta == other.meta
        )

    @property
    def empty(self) -> bool:
        return len(self.symbols) == 0

    def tolist(self) -> list[int]:
        return self.symbols.tolist()


# --------------------------------------------------------------------------
# encodings


def _radix(counts: np.ndarray, width: int) -> np.ndarray:
    b = width + 1
    return ((counts[:, 0] * b + counts[:, 1]) * b + counts[:, 2]) * b + counts[:, 3]


@lru_cache(maxsize=None)
def _partition_lut(width: int) -> np.ndarray:
    b = width + 1
    lut = np.full(b**4, -1, dtype=np.int64)
    for i, p in enumerate(partitions(width)):
        lut[((p[0] * b + p[1]) * b + p[2]) * b + p[3]] = i
    return lut


@lru_cache(maxsize=None)
def _composition_lut(width: int) -> np.ndarray:
    b = width + 1
    lut = np.full(b**4, -1, dtype=np.int64)
    for i, p in enumerate(compositions_of(width)):
        lut[((p[0] * b + p[1]) * b + p[2]) * b + p[3]] = i
    return lut


def encode_combination(digits, width: int | None = None) -> int:
    """Index of a sorted quadruple among the lexicographically ordered partitions."""
    digits = tuple(sorted(int(d) for d in digits))
    return partitions(sum(digits) if width is None else width).index(digits)


def decode_combination(symbol: int, width: int) -> tuple[int, int, int, int]:
    return partitions(width)[symbol]


def encode_composition(counts, width: int | None = None) -> int:
    counts = tuple(int(c) for c in counts)
    return compositions_of(sum(counts) if width is None else width).index(counts)


def decode_composition(symbol: int, width: int) -> tuple[int, int, int, int]:
    return compositions_of(width)[symbol]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_candidates(digits) -> set[int]:
    """1- and 2-digit numbers formable from the nonzero single digits, no element reused."""
    pool = [d for d in digits if 0 < d <= 9]
    out = set(pool)
    for i, j in permutations(range(len(pool)), 2):
        out.add(10 * pool[i] + pool[j])
    return out


def combination_primes(digits) -> list[int]:
    return sorted(n for n in prime_candidates(digits) if is_prime(n))


@lru_cache(maxsize=None)
def _prime_table(width: int) -> tuple[np.ndarray, np.ndarray]:
    parts = partitions(width)
    values = np.zeros((len(parts), PRIME_SLOTS), dtype=np.int64)
    mask = np.zeros((len(parts), PRIME_SLOTS), dtype=bool)
    for i, p in enumerate(parts):
        primes = combination_primes(p)
        values[i, : len(primes)] = primes
        mask[i, : len(primes)] = True
    return values, mask


def _as_segmentation(segments, base_order: str = DEFAULT_BASE_ORDER) -> Segmentation:
    if isinstance(segments, Segmentation):
        return segments
    segments = list(segments)
    if segments and isinstance(segments[0], Segment):
        return Segmentation.from_segments(segments, base_order)
    return Segmentation.from_counts(segments)


def _column(seg: Segmentation, base: str) -> np.ndarray:
    return seg.counts[:, seg.base_order.index(base)]


def ordered_values(counts: np.ndarray) -> np.ndarray:
    """Read each ordered quadruple as ``c0*1000 + c1*100 + c2*10 + c3``."""
    return counts[:, 0] * 1000 + counts[:, 1] * 100 + counts[:, 2] * 10 + counts[:, 3]


# --------------------------------------------------------------------------
# per-segment keys


def combination_stream(segments, key_id: int = 1) -> SymbolStream:
    seg = _as_segmentation(segments)
    canon = np.sort(seg.counts, axis=1)
    symbols = _partition_lut(seg.width)[_radix(canon, seg.width)]
    return SymbolStream(key_id, symbols, np.arange(len(seg)), {"form": "canonical", "position_unit": "segment"})


def prime_stream(segments, key_id: int = 2) -> SymbolStream:
    """Primes formable from each segment's combination digits, ascending.

    Positions are ``segment_index * 16 + slot`` so that several symbols from
    one segment keep strictly increasing anchors.
    """
    seg = _as_segmentation(segments)
    canon_idx = combination_stream(seg).symbols
    values, mask = _prime_table(seg.width)
    rows = mask[canon_idx]
    seg_idx, slot = np.nonzero(rows)
    symbols = values[canon_idx][rows]
    return SymbolStream(
        key_id,
        symbols,
        seg_idx * PRIME_SLOTS + slot,
        {"form": "canonical", "position_unit": f"segment*{PRIME_SLOTS}+slot"},
    )


def rotation_canonical_stream(segments, key_id: int = 21) -> SymbolStream:
    """Lexicographically smallest cyclic rotation of each ordered quadruple.

    This is a documented variant, not a reconstruction of the original tables.
    """
    seg = _as_segmentation(segments)
    c = seg.counts
    rots = np.stack([_radix(np.roll(c, -r, axis=1), seg.width) for r in range(4)], axis=1)
    symbols = _composition_lut(seg.width)[rots.min(axis=1)]
    return SymbolStream(
        key_id, symbols, np.arange(len(seg)), {"form": "ordered", "position_unit": "segment", "variant": True}
    )


def determinant_stream(segments, key_id: int = 22) -> SymbolStream:
    """``|det [[A, C], [G, T]]|`` per segment."""
    seg = _as_segmentation(segments)
    a, t, g, c = (_column(seg, b) for b in "ATGC")
    return SymbolStream(key_id, np.abs(a * t - c * g), np.arange(len(seg)), {"form": "ordered", "position_unit": "segment"})


# --------------------------------------------------------------------------
# marker distances


@dataclass(frozen=True)
class MarkerPredicate:
    """A per-segment boolean test; ``mask`` evaluates it over a whole stream."""

    key_id: int
    kind: str
    params: dict = field(default_factory=dict, hash=False)

    def mask(self, seg: Segmentation) -> np.ndarray:
        c = seg.counts
        n = len(c)
        canon = np.sort(c, axis=1)
        kind = self.kind
        if kind == "explicit-set":
            out = np.zeros(n, dtype=bool)
            if self.params.get("canonical"):
                out |= _rows_in(canon, self.params["canonical"])
            if self.params.get("ordered"):
                out |= _rows_in(c, self.params["ordered"])
            return out
        if kind == "period-2":
            return (c[:, 0] == c[:, 2]) & (c[:, 1] == c[:, 3])
        if kind == "stepwise":
            return _rows_in(canon, [self.params["combination"]])
        if kind == "fibonacci-sum":
            return (canon[:, 0] == 0) & (canon[:, 1] + canon[:, 2] == canon[:, 3])
        if kind in ("permutation-after-gap", "adjacent-permutation"):
            lag = self.params["lag"]
            out = np.zeros(n, dtype=bool)
            if n > lag:
                out[: n - lag] = np.all(canon[:-lag] == canon[lag:], axis=1)
            return out
        if kind == "contains-count":
            return np.any(c == self.params["count"], axis=1)
        if kind == "divisible-by-4":
            return ordered_values(c) % self.params["divisor"] == 0
        raise ValueError(f"unknown predicate kind {kind!r}")


def _rows_in(rows: np.ndarray, targets) -> np.ndarray:
    if len(rows) == 0:
        return np.zeros(0, dtype=bool)
    targets = np.asarray(sorted(set(map(tuple, targets))), dtype=np.int64).reshape(-1, 4)
    base = int(max(rows.max(), targets.max())) + 1
    return np.isin(_radix(rows, base - 1), _radix(targets, base - 1))


def marker_distance_stream(segments, pred: MarkerPredicate) -> SymbolStream:
    """Gaps (in segments) between consecutive segments satisfying ``pred``."""
    seg = _as_segmentation(segments)
    markers = np.flatnonzero(pred.mask(seg))
    form = "ordered" if pred.kind in ("period-2", "contains-count", "divisible-by-4") else "canonical"
    if pred.kind == "explicit-set" and pred.params.get("ordered"):
        form = "ordered" if not pred.params.get("canonical") else "canonical+ordered"
    return SymbolStream(
        pred.key_id,
        np.diff(markers),
        markers[1:],
        {"form": form, "position_unit": "segment", "markers": int(len(markers)), "predicate": pred.kind},
    )


def digit_sequence(seg: Segmentation) -> np.ndarray:
    """Concatenated decimal digits of the ordered compositions."""
    flat = seg.counts.ravel()
    if flat.size == 0 or flat.max() <= 9:
        return flat.copy()
    text = "".join(map(str, flat.tolist()))
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8).astype(np.int64) - 48


def digit_distance_stream(segments, digit: int, key_id: int = 10) -> SymbolStream:
    if not 0 <= digit <= 9:
        raise ValueError("digit must be in 0..9")
    seg = _as_segmentation(segments)
    hits = np.flatnonzero(digit_sequence(seg) == digit)
    return SymbolStream(
        key_id,
        np.diff(hits),
        hits[1:],
        {"form": "ordered", "position_unit": "digit", "digit": digit, "occurrences": int(len(hits))},
    )


def next_higher_distance_stream(segments, key_id: int = 20) -> SymbolStream:
    """Distance from each segment to the next one whose ordered value is strictly larger."""
    seg = _as_segmentation(segments)
    values = ordered_values(seg.counts).tolist()
    n = len(values)
    nxt = [-1] * n
    stack: list[int] = []
    for j, v in enumerate(values):
        while stack and values[stack[-1]] < v:
            nxt[stack.pop()] = j
        stack.append(j)
    pos = [i for i in range(n) if nxt[i] >= 0]
    symbols = [nxt[i] - i for i in pos]
    return SymbolStream(
        key_id,
        symbols,
        pos,
        {"form": "ordered", "position_unit": "segment", "truncated": n - len(pos)},
    )


def divisible_permutations(cv, divisor: int) -> set[int]:
    """Distinct 4-digit arrangements of the counts that ``divisor`` divides."""
    digits = tuple(int(d) for d in cv)
    if divisor < 1:
        raise ValueError("divisor must be >= 1")
    if any(d > 9 for d in digits):
        raise CountOverflow(f"count >= 10 in {digits} has no single-digit form")
    out = set()
    for p in set(permutations(digits)):
        value = int("".join(map(str, p)))
        if value % divisor == 0:
            out.add(value)
    return out


# --------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class KeySpec:
    key_id: int
    name: str
    description: str
    form: str
    build: Callable[..., SymbolStream]
    symbol_kind: str = "integer"
    variant: bool = False


def _marker(key_id, kind, **params):
    pred = MarkerPredicate(key_id, kind, params)
    return lambda seg, **_: marker_distance_stream(seg, pred)


def _digit(key_id, digit):
    return lambda seg, **_: digit_distance_stream(seg, digit, key_id)


def _loops(seg, loops=None, **_):
    return marker_distance_stream(seg, MarkerPredicate(8, "explicit-set", {"ordered": loops or DEFAULT_LOOPS}))


KEYS: dict[int, KeySpec] = {
    k.key_id: k
    for k in [
        KeySpec(1, "combination", "canonical base combination per segment", "canonical",
                lambda seg, **_: combination_stream(seg), symbol_kind="combination"),
        KeySpec(2, "random primes", "primes formable from each combination's digits", "canonical",
                lambda seg, **_: prime_stream(seg)),
        KeySpec(3, "tetrad primes", "distances between combinations 0055, 2233, 0235, 0037", "canonical",
                _marker(3, "explicit-set", canonical=[(0, 0, 5, 5), (2, 2, 3, 3), (0, 2, 3, 5), (0, 0, 3, 7)])),
        KeySpec(4, "recursive steps", "distances between period-2 vectors (0505, 2323, 1414)", "ordered",
                _marker(4, "period-2")),
        KeySpec(5, "stepwise refinement", "distances between combinations 1234", "canonical",
                _marker(5, "stepwise", combination=(1, 2, 3, 4))),
        KeySpec(6, "fibonacci numbers", "distances between combinations 0028, 0055, 0235", "canonical",
                _marker(6, "explicit-set", canonical=[(0, 0, 2, 8), (0, 0, 5, 5), (0, 2, 3, 5)])),
        KeySpec(7, "fibonacci sequence", "distances between three-term sequences x+y=z (0055, 0145, 0235)",
                "canonical", _marker(7, "fibonacci-sum")),
        KeySpec(8, "loops (1)", "distances between loop vectors 2035, 2080, 1036, 0505 (configurable)",
                "ordered", _loops),
        KeySpec(9, "loops (2)", "distances between segments permuted two segments later", "canonical",
                _marker(9, "permutation-after-gap", lag=2)),
        KeySpec(10, "loops (3)", "distances between zero digits", "digits", _digit(10, 0)),
        KeySpec(11, "stacks", "distances between segments permuted by the next segment", "canonical",
                _marker(11, "adjacent-permutation", lag=1)),
        KeySpec(12, "queues", "distances between queue combinations 1333 ... 4402", "canonical+ordered",
                _marker(12, "explicit-set",
                        canonical=[(1, 3, 3, 3), (2, 2, 2, 4), (0, 0, 5, 5), (1, 1, 3, 5), (2, 2, 3, 3), (1, 1, 4, 4)],
                        ordered=[(3, 3, 0, 4), (4, 4, 0, 2)])),
        KeySpec(13, "cipher ratio (1)", "distances between digit 1", "digits", _digit(13, 1)),
        KeySpec(14, "cipher ratio (2)", "distances between digit 5", "digits", _digit(14, 5)),
        KeySpec(15, "cipher class", "distances between digit 2", "digits", _digit(15, 2)),
        KeySpec(16, "codon number", "distances between digit 3", "digits", _digit(16, 3)),
        KeySpec(17, "cipher number", "distances between digit 4", "digits", _digit(17, 4)),
        KeySpec(18, "cipher ratio (3)", "distances between segments holding a count of 5", "ordered",
                _marker(18, "contains-count", count=5)),
        KeySpec(19, "divisibility", "distances between segments whose ATGC number is divisible by 4", "ordered",
                _marker(19, "divisible-by-4", divisor=4)),
        KeySpec(20, "sorting (1)", "distance to the next segment with a higher ATGC number", "ordered",
                lambda seg, **_: next_higher_distance_stream(seg)),
        KeySpec(21, "sorting (2)", "minimal cyclic rotation of the ATGC counts", "ordered",
                lambda seg, **_: rotation_canonical_stream(seg), symbol_kind="composition", variant=True),
        KeySpec(22, "matrix determinant", "absolute determinant of the 2x2 matrix [[A, C], [G, T]]", "ordered",
                lambda seg, **_: determinant_stream(seg)),
    ]
}


def key_stream(key_id: int, segments, **options) -> SymbolStream:
    """Run key ``key_id`` over ``segments``.

    ``options`` carries per-key configuration; currently only ``loops`` (an
    iterable of ordered quadruples) for key 8.
    """
    spec = KEYS.get(key_id)
    if spec is None:
        raise UnknownKey(f"unknown key {key_id!r}; valid keys are 1..22")
    seg = _as_segmentation(segments)
    stream = spec.build(seg, **options)
    if stream.empty:
        log.warning("key %d produced an empty stream", key_id)
    return stream


def symbol_label(key_id: int, symbol: int, width: int) -> str:
    """Human-readable form of a symbol (digit string for tuple-valued keys)."""
    kind = KEYS[key_id].symbol_kind
    if kind == "combination":
        return render_counts(decode_combination(symbol, width))
    if kind == "composition":
        return render_counts(decode_composition(symbol, width))
    return str(symbol)


def list_keys() -> list[KeySpec]:
    return [KEYS[k] for k in sorted(KEYS)]
