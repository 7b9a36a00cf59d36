"""Monte Carlo null models for word yield.

Each trial shuffles the input sequence, reruns the whole pipeline (segment,
key stream, substitution table rebuilt from the shuffled stream, decipher,
word search) and records the yield statistics. Trial ``t`` draws from the
substream ``SeedSequence(seed, spawn_key=(t,))``, so any partition of the
trials across workers reproduces the sequential result exactly.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from dnacipher.errors import DnaCipherError
from dnacipher.keystreams import key_stream
from dnacipher.lexicon import Dictionary, covered_fraction
from dnacipher.segmentation import DEFAULT_BASE_ORDER, DEFAULT_WIDTH, segment
from dnacipher.sequence_io import NucleotideSequence
from dnacipher.substitution import ReferenceLetterTable, build_substitution, decipher, tally

log = logging.getLogger(__name__)

MODES = ("base-permutation", "dinucleotide-preserving", "segment-permutation")
STATISTICS = ("total_matches", "matches_len_ge_4", "covered_fraction")
DEFAULT_TRIALS = 1000


class TrialFailure(DnaCipherError):
    def __init__(self, trial: int, cause: Exception):
        self.trial = trial
        super().__init__(f"null trial {trial} failed: {cause}")


@dataclass
class NullModelReport:
    key_id: int
    trials: int
    mode: str
    seed: int
    observed: dict[str, float]
    null_distribution: dict[str, list[float]]
    empirical_p: dict[str, float]
    statistics: tuple[str, ...] = STATISTICS
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["statistics"] = list(self.statistics)
        return d

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


# --------------------------------------------------------------------------
# shuffles


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _permute_bases(bases: str, rng) -> str:
    arr = np.frombuffer(bases.encode("ascii"), dtype=np.uint8)
    return rng.permutation(arr).tobytes().decode("ascii")


def _permute_segments(bases: str, width: int, rng) -> str:
    n = len(bases) // width
    arr = np.frombuffer(bases.encode("ascii"), dtype=np.uint8)
    body = arr[: n * width].reshape(n, width)[rng.permutation(n)]
    return body.tobytes().decode("ascii") + bases[n * width :]


def _dinucleotide_shuffle(bases: str, rng) -> str:
    """Uniform doublet-preserving shuffle (Altschul & Erickson edge-walk method).

    Build the doublet multigraph, draw a random last exit edge for every
    vertex other than the final base such that these edges form a tree into
    the final base (rejection sampling), shuffle the remaining exits and walk.
    """
    if len(bases) < 3:
        return bases
    first, last = bases[0], bases[-1]
    exits: dict[str, list[str]] = {}
    for a, b in zip(bases, bases[1:]):
        exits.setdefault(a, []).append(b)
    vertices = sorted(exits)

    while True:
        chosen = {v: int(rng.integers(len(exits[v]))) for v in vertices if v != last}
        tree = {v: exits[v][i] for v, i in chosen.items()}
        if _reaches(tree, last):
            break

    order: dict[str, list[str]] = {}
    for v in vertices:
        edges = exits[v]
        if v in chosen:
            rest = edges[: chosen[v]] + edges[chosen[v] + 1 :]
            order[v] = [rest[i] for i in rng.permutation(len(rest))] + [edges[chosen[v]]]
        else:
            order[v] = [edges[i] for i in rng.permutation(len(edges))]

    ptr = dict.fromkeys(vertices, 0)
    out = [first]
    cur = first
    for _ in range(len(bases) - 1):
        nxt = order[cur][ptr[cur]]
        ptr[cur] += 1
        out.append(nxt)
        cur = nxt
    return "".join(out)


def _reaches(tree: dict[str, str], root: str) -> bool:
    for v in tree:
        seen = set()
        while v != root:
            if v in seen:
                return False
            seen.add(v)
            v = tree[v]
    return True


def shuffle(seq: NucleotideSequence, mode: str, seed, width: int = DEFAULT_WIDTH) -> NucleotideSequence:
    """A randomised copy of ``seq``.

    ``base-permutation`` keeps base counts, ``dinucleotide-preserving`` keeps
    all 16 adjacent-pair counts, ``segment-permutation`` reorders whole
    width-sized segments and leaves the remainder in place at the end.
    """
    rng = _as_rng(seed)
    if mode == "base-permutation":
        bases = _permute_bases(seq.bases, rng)
    elif mode == "dinucleotide-preserving":
        bases = _dinucleotide_shuffle(seq.bases, rng)
    elif mode == "segment-permutation":
        bases = _permute_segments(seq.bases, width, rng)
    else:
        raise ValueError(f"unknown shuffle mode {mode!r}; choose from {', '.join(MODES)}")
    return NucleotideSequence(f"{seq.id}|shuffled", bases, f"{mode} shuffle", seq.origin)


# --------------------------------------------------------------------------
# pipeline statistics


def key_statistics(
    seg, key_id: int, dictionary: Dictionary, ref: ReferenceLetterTable, key_options: dict | None = None
) -> dict[str, float]:
    """Word-yield statistics of one key over one segmentation."""
    stream = key_stream(key_id, seg, **(key_options or {}))
    table = build_substitution(tally(stream), ref, key_id)
    letters = decipher(stream, table)
    starts, lengths = dictionary.match_arrays(letters)
    return {
        "total_matches": int(len(starts)),
        "matches_len_ge_4": int(np.count_nonzero(lengths >= 4)),
        "covered_fraction": covered_fraction(starts, lengths, len(letters)),
    }


def empirical_p(observed: float, null: list[float]) -> float:
    """Add-one estimate ``(1 + #{null >= observed}) / (trials + 1)``."""
    exceed = sum(1 for v in null if v >= observed)
    return (1 + exceed) / (len(null) + 1)


def _run_trials(args) -> list[dict[int, dict[str, float]]]:
    seq, key_ids, dictionary, ref, mode, seed, width, base_order, key_options, trial_ids = args
    out = []
    for t in trial_ids:
        try:
            shuffled = shuffle(seq, mode, trial_rng(seed, t), width)
            seg = segment(shuffled, width, base_order)
            out.append({k: key_statistics(seg, k, dictionary, ref, key_options) for k in key_ids})
        except Exception as exc:
            raise TrialFailure(t, exc) from exc
    return out


def run_null_many(
    seq: NucleotideSequence,
    key_ids,
    dictionary: Dictionary,
    ref: ReferenceLetterTable,
    trials: int = DEFAULT_TRIALS,
    mode: str = "segment-permutation",
    seed: int = 0,
    width: int = DEFAULT_WIDTH,
    base_order: str = DEFAULT_BASE_ORDER,
    key_options: dict | None = None,
    workers: int = 1,
) -> dict[int, NullModelReport]:
    """Null reports for several keys, sharing one shuffled sequence per trial.

    Each key's report equals what :func:`run_null` gives for that key alone.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode not in MODES:
        raise ValueError(f"unknown shuffle mode {mode!r}; choose from {', '.join(MODES)}")
    key_ids = list(key_ids)
    seg = segment(seq, width, base_order)
    observed = {k: key_statistics(seg, k, dictionary, ref, key_options) for k in key_ids}

    common = (seq, key_ids, dictionary, ref, mode, seed, width, base_order, key_options)
    if workers > 1:
        chunks = [list(c) for c in np.array_split(np.arange(trials), workers) if len(c)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_run_trials, [common + (c,) for c in chunks])
            results = [r for part in parts for r in part]
    else:
        results = _run_trials(common + (range(trials),))

    reports = {}
    for k in key_ids:
        null = {s: [r[k][s] for r in results] for s in STATISTICS}
        reports[k] = NullModelReport(
            key_id=k,
            trials=trials,
            mode=mode,
            seed=seed,
            observed=observed[k],
            null_distribution=null,
            empirical_p={s: empirical_p(observed[k][s], null[s]) for s in STATISTICS},
            meta={"width": width, "base_order": base_order, "reference": ref.name, "dictionary": dictionary.source},
        )
    return reports


def run_null(
    seq: NucleotideSequence,
    key_id: int,
    dictionary: Dictionary,
    ref: ReferenceLetterTable,
    trials: int = DEFAULT_TRIALS,
    mode: str = "segment-permutation",
    seed: int = 0,
    **kwargs,
) -> NullModelReport:
    return run_null_many(seq, [key_id], dictionary, ref, trials, mode, seed, **kwargs)[key_id]
