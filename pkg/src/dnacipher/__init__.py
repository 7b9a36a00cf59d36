"""Cryptanalysis workbench that reads nucleotide sequences as cryptograms."""

from dnacipher.errors import DnaCipherError
from dnacipher.sequence_io import NucleotideSequence, extract_region, fetch_accession, parse_fasta, read_sequence
from dnacipher.segmentation import Segment, Segmentation, canonical, composition, segment
from dnacipher.keystreams import KEYS, SymbolStream, divisible_permutations, key_stream
from dnacipher.substitution import (
    FrequencyTable,
    ReferenceLetterTable,
    SubstitutionTable,
    build_substitution,
    decipher,
    default_reference,
    tally,
)
from dnacipher.lexicon import (
    Dictionary,
    WordMatch,
    default_dictionary,
    find_words,
    load_dictionary,
    yield_statistics,
)
from dnacipher.nullmodel import NullModelReport, run_null, shuffle

__version__ = "0.1.0"

__all__ = [
    "DnaCipherError",
    "Dictionary",
    "FrequencyTable",
    "KEYS",
    "NucleotideSequence",
    "NullModelReport",
    "ReferenceLetterTable",
    "Segment",
    "Segmentation",
    "SubstitutionTable",
    "SymbolStream",
    "WordMatch",
    "build_substitution",
    "canonical",
    "composition",
    "decipher",
    "default_dictionary",
    "default_reference",
    "divisible_permutations",
    "extract_region",
    "fetch_accession",
    "find_words",
    "key_stream",
    "load_dictionary",
    "parse_fasta",
    "read_sequence",
    "run_null",
    "segment",
    "shuffle",
    "tally",
    "yield_statistics",
]
