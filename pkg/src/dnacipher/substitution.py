"""Frequency-rank substitution from cipher symbols to English letters."""

from __future__ import annotations

import csv
import io
import math
import string
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from dnacipher.errors import InvalidReferenceTable, UncoveredSymbol

OVERFLOW = "?"
LETTERS = string.ascii_uppercase


@dataclass(frozen=True)
class FrequencyTable:
    entries: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    def ranked(self) -> list[tuple[int, int]]:
        """``(symbol, count)`` by descending count, ties by ascending symbol."""
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ReferenceLetterTable:
    entries: dict[str, float]
    name: str = "custom"

    def __post_init__(self):
        if sorted(self.entries) != list(LETTERS):
            missing = sorted(set(LETTERS) - set(self.entries))
            raise InvalidReferenceTable(f"reference table must cover A..Z exactly (missing {missing})")
        if any(not math.isfinite(v) or v < 0 for v in self.entries.values()):
            raise InvalidReferenceTable("frequencies must be finite and non-negative")
        if abs(sum(self.entries.values()) - 1.0) > 1e-9:
            raise InvalidReferenceTable("frequencies must sum to 1")

    def ranked(self) -> list[str]:
        return sorted(self.entries, key=lambda letter: (-self.entries[letter], letter))

    @classmethod
    def from_text(cls, text: str, name: str = "custom") -> "ReferenceLetterTable":
        """Parse ``letter<TAB|,>frequency`` rows; a header row is optional.

        Raw counts or percentages are accepted and normalised to sum to 1.
        """
        raw: dict[str, float] = {}
        for lineno, row in enumerate(_rows(text), start=1):
            if len(row) < 2:
                raise InvalidReferenceTable(f"line {lineno}: expected two columns")
            letter, value = row[0].strip().upper(), row[1].strip()
            try:
                freq = float(value)
            except ValueError:
                if lineno == 1:
                    continue
                raise InvalidReferenceTable(f"line {lineno}: bad frequency {value!r}") from None
            if len(letter) != 1 or letter not in LETTERS:
                raise InvalidReferenceTable(f"line {lineno}: bad letter {row[0]!r}")
            if letter in raw:
                raise InvalidReferenceTable(f"line {lineno}: duplicate letter {letter}")
            raw[letter] = freq
        total = sum(raw.values())
        if total <= 0:
            raise InvalidReferenceTable("frequencies sum to zero")
        return cls({k: v / total for k, v in raw.items()}, name=name)

    @classmethod
    def from_file(cls, path) -> "ReferenceLetterTable":
        path = Path(path)
        return cls.from_text(path.read_text(encoding="utf-8"), name=str(path))


def _rows(text: str):
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        delim = "\t" if "\t" in line else ","
        yield next(csv.reader(io.StringIO(line), delimiter=delim))


def default_reference() -> ReferenceLetterTable:
    """Standard English letter frequencies (bundled ``english_letters.tsv``)."""
    text = resources.files("dnacipher.data").joinpath("english_letters.tsv").read_text(encoding="utf-8")
    return ReferenceLetterTable.from_text(text, name="english_letters (bundled)")


@dataclass(frozen=True)
class SubstitutionTable:
    key_id: int
    mapping: dict[int, str]
    rank_trace: list[tuple[int, int, str]] = field(default_factory=list)
    reference: str = ""

    def __len__(self) -> int:
        return len(self.mapping)


def tally(stream) -> FrequencyTable:
    symbols = np.asarray(getattr(stream, "symbols", stream), dtype=np.int64)
    if symbols.size == 0:
        return FrequencyTable({})
    values, counts = np.unique(symbols, return_counts=True)
    return FrequencyTable(dict(zip(values.tolist(), counts.tolist())))


def build_substitution(freq: FrequencyTable, ref: ReferenceLetterTable, key_id: int = 0) -> SubstitutionTable:
    """Pair the k-th most frequent symbol with the k-th most frequent letter.

    Symbols past rank 26 map to ``?``.
    """
    letters = ref.ranked()
    mapping: dict[int, str] = {}
    trace = []
    for rank, (symbol, count) in enumerate(freq.ranked()):
        letter = letters[rank] if rank < len(letters) else OVERFLOW
        mapping[symbol] = letter
        trace.append((symbol, count, letter))
    return SubstitutionTable(key_id, mapping, trace, ref.name)


def decipher(stream, table: SubstitutionTable) -> str:
    symbols = getattr(stream, "symbols", stream)
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.size == 0:
        return ""
    if not table.mapping:
        raise UncoveredSymbol(f"symbol {int(symbols[0])} not in substitution table")
    keys = np.fromiter(table.mapping.keys(), dtype=np.int64)
    vals = np.frombuffer("".join(table.mapping.values()).encode("ascii"), dtype=np.uint8)
    order = np.argsort(keys)
    keys, vals = keys[order], vals[order]
    idx = np.searchsorted(keys, symbols)
    idx_clipped = np.minimum(idx, len(keys) - 1)
    bad = keys[idx_clipped] != symbols
    if bad.any():
        raise UncoveredSymbol(f"symbol {int(symbols[bad][0])} not in substitution table")
    return vals[idx_clipped].tobytes().decode("ascii")


def load_fixture_table(path) -> list[dict]:
    """Read a ``symbol  letter  word`` fixture table, flagging repeated symbols."""
    rows = []
    seen: Counter[str] = Counter()
    for i, row in enumerate(_rows(Path(path).read_text(encoding="utf-8"))):
        if i == 0 and row[0].strip().lower() == "symbol":
            continue
        symbol, letter = row[0].strip(), row[1].strip().upper()
        word = row[2].strip().upper() if len(row) > 2 else ""
        seen[symbol] += 1
        rows.append({"symbol": symbol, "letter": letter, "word": word, "duplicate": seen[symbol] > 1})
    return rows
