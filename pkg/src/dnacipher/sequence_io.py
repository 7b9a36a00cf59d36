"""Sequence ingestion: FASTA / raw text parsing, region extraction, remote fetch."""

from __future__ import annotations

import io
import logging
import os
import urllib.error
import urllib.request
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import BinaryIO, Literal

from dnacipher.errors import (
    EmptyInput,
    HttpFailure,
    InvalidCharacter,
    NetworkDisabled,
    OutOfRange,
    ParseFailure,
    ZeroCoordinate,
)

log = logging.getLogger(__name__)

BASES = frozenset("ACGT")
# IUPAC ambiguity codes (and U); anything else is rejected outright
AMBIGUOUS = frozenset("RYSWKMBDHVNU")
COMPLEMENT = str.maketrans("ACGT", "TGCA")

DEFAULT_ENDPOINT = (
    "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/efetch.fcgi"
    "?db=nuccore&id={accession}&rettype=fasta&retmode=text"
)
CACHE_ENV = "DNACIPHER_CACHE"
NETWORK_ENV = "DNACIPHER_NETWORK"

AmbiguityPolicy = Literal["reject", "drop"]


class AmbiguousBase(InvalidCharacter):
    """An IUPAC ambiguity code met while the policy is ``reject``."""


@dataclass(frozen=True)
class Origin:
    accession: str
    start: int
    end: int
    strand: Literal["forward", "reverse"]


@dataclass(frozen=True)
class NucleotideSequence:
    """An immutable run of bases over ``ACGT``.

    ``bases`` is kept as a plain string; ``dropped_ambiguous`` counts the
    ambiguity codes removed at parse time under the ``drop`` policy.
    """

    id: str
    bases: str
    description: str = ""
    origin: Origin | None = None
    dropped_ambiguous: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.bases:
            raise EmptyInput(f"sequence {self.id!r} has no bases")
        bad = set(self.bases) - BASES
        if bad:
            raise InvalidCharacter(sorted(bad)[0], 0, self.bases.index(sorted(bad)[0]) + 1)

    def __len__(self) -> int:
        return len(self.bases)


def _decode(data) -> str:
    if isinstance(data, str):
        return data
    if isinstance(data, (bytes, bytearray)):
        return bytes(data).decode("utf-8", errors="replace")
    return _decode(data.read())


def parse_fasta(
    data: bytes | str | BinaryIO, ambiguity: AmbiguityPolicy = "reject"
) -> list[NucleotideSequence]:
    """Parse FASTA text (or header-less raw bases) into sequences.

    Text before the first ``>`` header becomes a record named ``anonymous``.
    ``\\r\\n`` line endings, blank lines and interior whitespace are tolerated.
    """
    if ambiguity not in ("reject", "drop"):
        raise ValueError(f"unknown ambiguity policy {ambiguity!r}")
    text = _decode(data)

    records: list[tuple[str, str, list[str], int]] = []
    header: tuple[str, str] | None = None
    chunks: list[str] = []
    dropped = 0

    def flush():
        nonlocal chunks, dropped
        if header is not None or chunks:
            ident, desc = header if header is not None else ("anonymous", "")
            records.append((ident, desc, chunks, dropped))
        chunks, dropped = [], 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        if line.startswith(">"):
            flush()
            ident, _, desc = line[1:].strip().partition(" ")
            header = (ident or "anonymous", desc.strip())
            continue
        keep = []
        for col, ch in enumerate(raw.upper(), start=1):
            if ch in BASES:
                keep.append(ch)
            elif ch.isspace():
                continue
            elif ch in AMBIGUOUS:
                if ambiguity == "reject":
                    raise AmbiguousBase(ch, lineno, col)
                dropped += 1
            else:
                raise InvalidCharacter(ch, lineno, col)
        chunks.append("".join(keep))
    flush()

    out = []
    for ident, desc, parts, n_dropped in records:
        bases = "".join(parts)
        if not bases:
            raise EmptyInput(f"record {ident!r} contains no bases")
        if n_dropped:
            log.info("record %s: dropped %d ambiguity codes", ident, n_dropped)
        out.append(NucleotideSequence(ident, bases, desc, dropped_ambiguous=n_dropped))
    if not out:
        raise EmptyInput("no bases found")
    return out


def read_sequence(path: str | os.PathLike, ambiguity: AmbiguityPolicy = "reject") -> NucleotideSequence:
    """Read the first record of a FASTA or raw-text file."""
    records = parse_fasta(Path(path).read_bytes(), ambiguity=ambiguity)
    if len(records) > 1:
        log.warning("%s holds %d records; using the first (%s)", path, len(records), records[0].id)
    return records[0]


def reverse_complement(bases: str) -> str:
    return bases.translate(COMPLEMENT)[::-1]


def extract_region(
    seq: NucleotideSequence, start: int, end: int, reverse_complement_descending: bool = True
) -> NucleotideSequence:
    """Return bases ``start..end`` (1-based, inclusive).

    Descending coordinates address the opposite strand read 5'->3', so the
    result is the reverse complement of ``end..start``. With
    ``reverse_complement_descending=False`` the forward slice is merely
    reversed instead.
    """
    if start == 0 or end == 0:
        raise ZeroCoordinate("coordinates are 1-based")
    lo, hi = min(start, end), max(start, end)
    if lo < 1 or hi > len(seq.bases):
        raise OutOfRange(f"region {start}..{end} outside 1..{len(seq.bases)}")
    piece = seq.bases[lo - 1 : hi]
    if start <= end:
        strand = "forward"
    else:
        strand = "reverse"
        piece = reverse_complement(piece) if reverse_complement_descending else piece[::-1]
    accession = seq.origin.accession if seq.origin else seq.id
    return replace(seq, bases=piece, origin=Origin(accession, start, end, strand))


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "dnacipher"


def _network_allowed() -> bool:
    return os.environ.get(NETWORK_ENV, "").lower() in ("1", "true", "yes", "on")


def fetch_accession(
    accession: str,
    endpoint: str = DEFAULT_ENDPOINT,
    cache_dir: str | os.PathLike | None = None,
    allow_network: bool | None = None,
    timeout: float = 60.0,
) -> NucleotideSequence:
    """Fetch a FASTA record by accession, caching the body as ``<accession>.fasta``.

    A warm cache is served without touching the network. Otherwise network
    access must be enabled, either by ``allow_network=True`` or by setting
    ``DNACIPHER_NETWORK=1``.
    """
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cached = cache / f"{accession}.fasta"
    if cached.is_file():
        log.debug("cache hit for %s", accession)
        return _parse_body(cached.read_bytes(), accession)

    if allow_network is None:
        allow_network = _network_allowed()
    if not allow_network:
        raise NetworkDisabled(f"network access disabled; cannot fetch {accession}")

    url = endpoint.format(accession=accession)
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            status = resp.status
            body = resp.read()
    except urllib.error.HTTPError as exc:
        raise HttpFailure(exc.code, url) from None
    except urllib.error.URLError as exc:
        raise HttpFailure(0, url) from exc
    if status != 200:
        raise HttpFailure(status, url)

    record = _parse_body(body, accession)
    cache.mkdir(parents=True, exist_ok=True)
    tmp = cached.with_suffix(".fasta.tmp")
    tmp.write_bytes(body)
    os.replace(tmp, cached)
    return record


def _parse_body(body: bytes, accession: str) -> NucleotideSequence:
    if not body.lstrip().startswith(b">"):
        raise ParseFailure(f"response for {accession} is not FASTA")
    try:
        return parse_fasta(io.BytesIO(body))[0]
    except (EmptyInput, InvalidCharacter) as exc:
        raise ParseFailure(f"response for {accession}: {exc}") from exc
