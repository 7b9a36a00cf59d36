"""Run configuration, per-key analysis and the JSON report format.

Report layout (``schema_version`` 1)::

    {
      "schema_version": 1,
      "tool": {"name": "dnacipher", "version": ...},
      "config": {...},                # echo of RunConfig
      "input": {...},                 # sequence id, region, segment counts
      "reference": "...", "dictionary": {...},
      "keys": {"1": {...}, ...},      # one section per selected key
      "notes": [...]
    }

Each key section holds ``stream_length``, ``frequency_table``,
``substitution`` (the rank trace), ``letters`` (or an elision record pointing
at a sidecar file), ``matches``, ``phrases``, ``yield`` and ``null`` (a
NullModelReport or ``null`` when no trials were run).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from dnacipher.errors import ConfigError, ParseFailure
from dnacipher.keystreams import DEFAULT_LOOPS, KEYS, key_stream, symbol_label
from dnacipher.lexicon import Dictionary, find_words, phrases, yield_statistics
from dnacipher.segmentation import DEFAULT_BASE_ORDER, DEFAULT_WIDTH, Segmentation
from dnacipher.substitution import ReferenceLetterTable, build_substitution, decipher, tally

SCHEMA_VERSION = 1
LETTER_CAP = 100_000
MULTIPLE_TESTING_NOTE = (
    "per-key p-values are reported side by side without correction; "
    "22 tests at the 0.05 level expect about one false positive"
)
VARIANT_NOTE = "key 21 is a rotation-canonical variant, not the original tables"


@dataclass
class RunConfig:
    input: str | None = None
    accession: str | None = None
    start: int | None = None
    end: int | None = None
    width: int = DEFAULT_WIDTH
    keys: str = "all"
    reference: str | None = None
    dictionary: str | None = None
    min_word_len: int = 2
    null_mode: str = "segment-permutation"
    trials: int = 0
    seed: int = 0
    out: str = "report.json"
    ambiguity: str = "reject"
    base_order: str = DEFAULT_BASE_ORDER
    reverse_complement: bool = True
    loops: str | None = None
    endpoint: str | None = None
    workers: int = 1

    def key_ids(self) -> list[int]:
        return parse_keys(self.keys)

    def loop_set(self):
        if not self.loops:
            return DEFAULT_LOOPS
        out = set()
        for item in self.loops.split(","):
            item = item.strip()
            if len(item) != 4 or not item.isdigit():
                raise ConfigError(f"loop pattern {item!r} must be four digits")
            out.add(tuple(int(c) for c in item))
        return frozenset(out)

    def validate(self) -> None:
        if (self.input is None) == (self.accession is None):
            raise ConfigError("give exactly one of --input or --accession")
        if self.input is not None and not os.access(self.input, os.R_OK):
            raise ConfigError(f"cannot read input {self.input}")
        for name in ("reference", "dictionary"):
            path = getattr(self, name)
            if path is not None and not os.access(path, os.R_OK):
                raise ConfigError(f"cannot read {name} file {path}")
        if (self.start is None) != (self.end is None):
            raise ConfigError("--start and --end go together")
        if self.width < 1:
            raise ConfigError("width must be >= 1")
        if self.trials < 0:
            raise ConfigError("trials must be >= 0")
        if self.min_word_len < 1:
            raise ConfigError("min-word-len must be >= 1")
        if self.ambiguity not in ("reject", "drop"):
            raise ConfigError("ambiguity must be 'reject' or 'drop'")
        from dnacipher.nullmodel import MODES

        if self.null_mode not in MODES:
            raise ConfigError(f"null mode must be one of {', '.join(MODES)}")
        if sorted(self.base_order.upper()) != sorted("ACGT"):
            raise ConfigError("base order must be a permutation of ACGT")
        self.key_ids()
        self.loop_set()

    def echo(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value: str):
    kind = _FIELDS[name].type
    if "int" in str(kind) and "str" not in str(kind):
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {value!r}") from None
    if "bool" in str(kind):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return value


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; keys are RunConfig field names (dashes allowed)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown setting {key!r}")
        out[key] = _coerce(key, value)
    return out


def parse_keys(spec: str) -> list[int]:
    """``"all"``, ``"1,22"`` or ranges such as ``"3-9,22"``."""
    spec = str(spec).strip().lower()
    if spec == "all":
        return sorted(KEYS)
    ids: set[int] = set()
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                ids.update(range(lo, hi + 1))
            else:
                ids.add(int(part))
        except ValueError:
            raise ConfigError(f"bad key selection {part!r}") from None
    bad = sorted(i for i in ids if i not in KEYS)
    if bad:
        raise ConfigError(f"unknown key(s) {bad}; valid keys are 1..22")
    if not ids:
        raise ConfigError("empty key selection")
    return sorted(ids)


# --------------------------------------------------------------------------
# per-key analysis


def analyze_key(
    seg: Segmentation,
    key_id: int,
    ref: ReferenceLetterTable,
    dictionary: Dictionary,
    key_options: dict | None = None,
) -> dict:
    stream = key_stream(key_id, seg, **(key_options or {}))
    freq = tally(stream)
    table = build_substitution(freq, ref, key_id)
    letters = decipher(stream, table)
    matches = find_words(letters, dictionary, key_id)
    spec = KEYS[key_id]

    def label(symbol):
        return symbol_label(key_id, symbol, seg.width)

    return {
        "key_id": key_id,
        "name": spec.name,
        "description": spec.description,
        "form": spec.form,
        "variant": spec.variant,
        "stream_length": len(stream),
        "empty": stream.empty,
        "meta": stream.meta,
        "frequency_table": [
            {"symbol": s, "label": label(s), "count": c} for s, c in freq.ranked()
        ],
        "substitution": [
            {"symbol": s, "label": label(s), "count": c, "letter": letter} for s, c, letter in table.rank_trace
        ],
        "letters": letters,
        "matches": [[m.start, m.word] for m in matches],
        "phrases": [" ".join(m.word for m in run) for run in phrases(matches)],
        "yield": yield_statistics(matches, letters, key_id).as_dict(),
        "null": None,
    }


def elide_letters(section: dict, out_path: Path, cap: int = LETTER_CAP) -> tuple[str, str] | None:
    """Replace a long letter stream by a digest record; return the sidecar to write."""
    letters = section["letters"]
    if len(letters) <= cap:
        return None
    sidecar = f"{out_path.name}.key{section['key_id']}.letters.txt"
    section["letters"] = {
        "elided": True,
        "length": len(letters),
        "sha256": hashlib.sha256(letters.encode("ascii")).hexdigest(),
        "sidecar": sidecar,
    }
    return sidecar, letters


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(report: dict, out, cap: int = LETTER_CAP) -> list[Path]:
    """Atomically write ``report`` (and any letter sidecars); return written paths."""
    out = Path(out)
    sidecars = []
    for section in report.get("keys", {}).values():
        if isinstance(section.get("letters"), str):
            side = elide_letters(section, out, cap)
            if side:
                sidecars.append(side)
    written = []
    for name, letters in sidecars:
        atomic_write(out.parent / name, letters)
        written.append(out.parent / name)
    atomic_write(out, dumps(report))
    written.append(out)
    return written


def load_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseFailure(f"{path} is not a JSON report: {exc}") from None


__all__ = [
    "LETTER_CAP",
    "MULTIPLE_TESTING_NOTE",
    "RunConfig",
    "SCHEMA_VERSION",
    "VARIANT_NOTE",
    "analyze_key",
    "atomic_write",
    "dumps",
    "load_report",
    "parse_keys",
    "read_config_file",
    "write_report",
]
