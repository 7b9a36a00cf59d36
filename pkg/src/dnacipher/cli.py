"""Command-line front end.

Subcommands: ``keys list``, ``analyze``, ``null``, ``diff-paper``, ``fetch``.
Exit codes: 0 success, 1 pipeline error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import re
import sys
from pathlib import Path

from dnacipher import __version__
from dnacipher.errors import ConfigError, DnaCipherError, MissingKeySection
from dnacipher.keystreams import list_keys
from dnacipher.lexicon import default_dictionary, load_dictionary
from dnacipher.nullmodel import run_null_many
from dnacipher.report import (
    MULTIPLE_TESTING_NOTE,
    SCHEMA_VERSION,
    VARIANT_NOTE,
    RunConfig,
    analyze_key,
    load_report,
    read_config_file,
    write_report,
)
from dnacipher.segmentation import segment
from dnacipher.sequence_io import DEFAULT_ENDPOINT, extract_region, fetch_accession, read_sequence
from dnacipher.substitution import ReferenceLetterTable, default_reference, load_fixture_table

log = logging.getLogger("dnacipher")


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _run_flags(p: argparse.ArgumentParser) -> None:
    # defaults are None so that config-file values show through
    p.add_argument("--config", help="flat key = value file with RunConfig settings")
    p.add_argument("--input", help="FASTA or raw sequence file")
    p.add_argument("--accession", help="fetch (or read from cache) this accession instead of --input")
    p.add_argument("--start", type=int, help="1-based region start")
    p.add_argument("--end", type=int, help="1-based region end; end < start selects the reverse complement")
    p.add_argument("--width", type=int, help="segment width (default 10)")
    p.add_argument("--keys", help='"all" or a list such as "1,3-9,22"')
    p.add_argument("--reference", help="letter-frequency table (letter, frequency)")
    p.add_argument("--dictionary", help="word list, one word per line")
    p.add_argument("--min-word-len", type=int, dest="min_word_len")
    p.add_argument("--null-mode", dest="null_mode",
                   choices=["base-permutation", "dinucleotide-preserving", "segment-permutation"])
    p.add_argument("--trials", type=int, help="null-model trials (0 skips the null model)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report path")
    p.add_argument("--ambiguity", choices=["reject", "drop"])
    p.add_argument("--base-order", dest="base_order", help="order of the count quadruple (default ATGC)")
    p.add_argument("--literal-reverse", dest="reverse_complement", action="store_const", const=False,
                   help="descending regions are reversed without complementing")
    p.add_argument("--loops", help="key 8 loop patterns, comma separated (default 2035,2080,1036,0505)")
    p.add_argument("--endpoint", help="URL template with {accession} for --accession fetches")
    p.add_argument("--workers", type=int, help="processes for null trials")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dnacipher", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dnacipher {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    keys = sub.add_parser("keys", help="inspect the key registry")
    keys_sub = keys.add_subparsers(dest="keys_command", required=True, parser_class=_Parser)
    keys_sub.add_parser("list", help="list all 22 keys")

    analyze = sub.add_parser("analyze", help="run keys, substitution and word search; write a JSON report")
    _run_flags(analyze)

    null = sub.add_parser("null", help="like analyze, with null-model trials (default 1000)")
    _run_flags(null)

    diff = sub.add_parser("diff-paper", help="compare a report's substitution with a reference table fixture")
    diff.add_argument("--report", required=True)
    diff.add_argument("--fixture", required=True)
    diff.add_argument("--key", type=int, help="key id (default: digits in the fixture file name)")

    fetch = sub.add_parser("fetch", help="download an accession into the cache")
    fetch.add_argument("--accession", required=True)
    fetch.add_argument("--endpoint", default=DEFAULT_ENDPOINT)
    fetch.add_argument("--cache-dir", dest="cache_dir")
    fetch.add_argument("--out", help="also copy the FASTA here")
    return parser


def resolve_config(args: argparse.Namespace, defaults: dict | None = None) -> RunConfig:
    """Merge built-in defaults < config file < command-line flags."""
    values = dict(defaults or {})
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for name in RunConfig.__dataclass_fields__:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def cmd_keys_list() -> str:
    lines = []
    for spec in list_keys():
        flag = "  [variant]" if spec.variant else ""
        lines.append(f"{spec.key_id:>2}  {spec.name:<20}  {spec.form:<17}  {spec.description}{flag}")
    return "\n".join(lines)


def _load_inputs(cfg: RunConfig):
    if cfg.input is not None:
        seq = read_sequence(cfg.input, ambiguity=cfg.ambiguity)
        source_bytes = Path(cfg.input).read_bytes()
    else:
        seq = fetch_accession(cfg.accession, endpoint=cfg.endpoint or DEFAULT_ENDPOINT)
        source_bytes = seq.bases.encode()
    if cfg.start is not None:
        seq = extract_region(seq, cfg.start, cfg.end, cfg.reverse_complement)
    ref = ReferenceLetterTable.from_file(cfg.reference) if cfg.reference else default_reference()
    dictionary = (
        load_dictionary(cfg.dictionary, cfg.min_word_len) if cfg.dictionary else default_dictionary(cfg.min_word_len)
    )
    return seq, hashlib.sha256(source_bytes).hexdigest(), ref, dictionary


def build_report(cfg: RunConfig) -> dict:
    seq, digest, ref, dictionary = _load_inputs(cfg)
    seg = segment(seq, cfg.width, cfg.base_order)
    key_ids = cfg.key_ids()
    options = {"loops": cfg.loop_set()}
    sections = {str(k): analyze_key(seg, k, ref, dictionary, options) for k in key_ids}
    notes = []
    if 21 in key_ids:
        notes.append(VARIANT_NOTE)
    if cfg.trials > 0:
        nulls = run_null_many(
            seq, key_ids, dictionary, ref, cfg.trials, cfg.null_mode, cfg.seed,
            width=cfg.width, base_order=cfg.base_order, key_options=options, workers=cfg.workers,
        )
        for k, rep in nulls.items():
            sections[str(k)]["null"] = rep.as_dict()
        notes.append(MULTIPLE_TESTING_NOTE)
    origin = seq.origin
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "dnacipher", "version": __version__},
        "config": cfg.echo(),
        "input": {
            "id": seq.id,
            "source_sha256": digest,
            "region": None if origin is None else {"start": origin.start, "end": origin.end, "strand": origin.strand},
            "length": len(seq),
            "segments": len(seg),
            "dropped_bases": seg.dropped,
            "dropped_ambiguous": seq.dropped_ambiguous,
            "width": cfg.width,
            "base_order": seg.base_order,
        },
        "reference": ref.name,
        "dictionary": {"source": dictionary.source, "words": len(dictionary), "min_len": dictionary.min_len,
                       "rejected": dictionary.rejected},
        "seed": cfg.seed,
        "keys": sections,
        "notes": notes,
    }


def cmd_analyze(cfg: RunConfig) -> Path:
    report = build_report(cfg)
    write_report(report, cfg.out)
    return Path(cfg.out)


def cmd_diff_paper(report_path, fixture_path, key_id: int | None = None) -> str:
    report = load_report(report_path)
    rows = load_fixture_table(fixture_path)
    if key_id is None:
        m = re.search(r"(\d+)", Path(fixture_path).stem)
        if not m:
            raise ConfigError("cannot infer key id from fixture name; pass --key")
        key_id = int(m.group(1))
    section = report.get("keys", {}).get(str(key_id))
    if section is None:
        raise MissingKeySection(f"report has no section for key {key_id}")
    ours = {row["label"]: row["letter"] for row in section["substitution"]}

    lines = [f"key {key_id}: fixture {fixture_path} vs report {report_path}",
             f"{'symbol':>8}  table  ours  word"]
    compared = agree = 0
    for row in rows:
        mine = ours.get(row["symbol"], "-")
        flag = ""
        if row["duplicate"]:
            flag = "  (duplicate row, not counted)"
        else:
            compared += 1
            agree += mine == row["letter"]
        mark = "=" if mine == row["letter"] else " "
        lines.append(f"{row['symbol']:>8}  {row['letter']:^5}  {mine:^4} {mark} {row['word']}{flag}")
    pct = 100.0 * agree / compared if compared else 0.0
    lines.append(f"agreement: {agree}/{compared} = {pct:.1f}%")
    return "\n".join(lines)


def _setup_logging(verbosity: int) -> None:
    level = logging.WARNING - 10 * min(verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"dnacipher: error: {exc}", file=sys.stderr)
        return 2
    _setup_logging(args.verbose)
    try:
        if args.command == "keys":
            print(cmd_keys_list())
        elif args.command in ("analyze", "null"):
            defaults = {"trials": 1000} if args.command == "null" else None
            cfg = resolve_config(args, defaults)
            out = cmd_analyze(cfg)
            print(f"wrote {out}")
        elif args.command == "diff-paper":
            print(cmd_diff_paper(args.report, args.fixture, args.key))
        elif args.command == "fetch":
            seq = fetch_accession(args.accession, args.endpoint, args.cache_dir, allow_network=True)
            if args.out:
                Path(args.out).write_text(f">{seq.id} {seq.description}\n{seq.bases}\n", encoding="utf-8")
            print(f"{seq.id}: {len(seq)} bases")
    except DnaCipherError as exc:
        print(f"dnacipher: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"dnacipher: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
