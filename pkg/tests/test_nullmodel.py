import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dnacipher.nullmodel as nm
from conftest import random_bases
from dnacipher.keystreams import key_stream
from dnacipher.nullmodel import MODES, empirical_p, run_null, run_null_many, shuffle
from dnacipher.segmentation import segment
from dnacipher.sequence_io import NucleotideSequence
from dnacipher.substitution import tally


def doublets(bases):
    return Counter(zip(bases, bases[1:]))


@settings(max_examples=40, deadline=None)
@given(st.text(alphabet="ACGT", min_size=1, max_size=300), st.integers(0, 2**31), st.sampled_from(MODES))
def test_shuffle_conserves_bases(bases, seed, mode):
    seq = NucleotideSequence("s", bases)
    out = shuffle(seq, mode, seed)
    assert sorted(out.bases) == sorted(bases)
    if mode == "dinucleotide-preserving":
        assert doublets(out.bases) == doublets(bases)
        assert out.bases[0] == bases[0] and out.bases[-1] == bases[-1]


def test_segment_permutation_keeps_key1_table(region_seq):
    out = shuffle(region_seq, "segment-permutation", 3)
    assert out.bases != region_seq.bases
    assert tally(key_stream(1, segment(out))) == tally(key_stream(1, segment(region_seq)))
    assert out.bases[-1:] == region_seq.bases[-1:]  # remainder stays at the tail


def test_dinucleotide_shuffle_is_uniform():
    """Every doublet-preserving rearrangement of a short sequence is equally likely."""
    bases = "ACAGTACG"
    target = doublets(bases)
    support = {
        "".join(p) for p in set(itertools.permutations(bases))
        if p[0] == bases[0] and doublets(p) == target
    }
    assert len(support) > 3
    rng = np.random.default_rng(0)
    draws = 400 * len(support)
    seen = Counter(nm._dinucleotide_shuffle(bases, rng) for _ in range(draws))
    assert set(seen) == support
    expected = draws / len(support)
    chi2 = sum((c - expected) ** 2 / expected for c in seen.values())
    # df = len(support) - 1; generous 99.9% bound
    assert chi2 < len(support) - 1 + 6 * np.sqrt(2 * (len(support) - 1)) + 10


def test_empirical_p_add_one():
    assert empirical_p(5, [1, 2, 3]) == 0.25
    assert empirical_p(0, [1, 2, 3]) == 1.0
    assert empirical_p(2, [1, 2, 3]) == 0.75


def test_trials_zero_rejected(region_seq, dictionary, reference):
    with pytest.raises(ValueError):
        run_null(region_seq, 1, dictionary, reference, trials=0)
    with pytest.raises(ValueError):
        run_null(region_seq, 1, dictionary, reference, trials=5, mode="nope")


def test_determinism_byte_identical(region_seq, dictionary, reference):
    a = run_null(region_seq, 3, dictionary, reference, trials=15, seed=99).to_json()
    b = run_null(region_seq, 3, dictionary, reference, trials=15, seed=99).to_json()
    assert a == b
    c = run_null(region_seq, 3, dictionary, reference, trials=15, seed=100).to_json()
    assert a != c


def test_many_equals_single(region_seq, dictionary, reference):
    many = run_null_many(region_seq, [1, 5, 22], dictionary, reference, trials=8, seed=4, mode="base-permutation")
    for k in (1, 5, 22):
        single = run_null(region_seq, k, dictionary, reference, trials=8, seed=4, mode="base-permutation")
        assert single.to_json() == many[k].to_json()


def test_parallel_equals_sequential(region_seq, dictionary, reference):
    kw = dict(trials=6, seed=12, mode="dinucleotide-preserving")
    seq_run = run_null_many(region_seq, [1, 20], dictionary, reference, **kw)
    par_run = run_null_many(region_seq, [1, 20], dictionary, reference, workers=2, **kw)
    assert {k: r.to_json() for k, r in seq_run.items()} == {k: r.to_json() for k, r in par_run.items()}


def test_report_fields(region_seq, dictionary, reference):
    rep = run_null(region_seq, 22, dictionary, reference, trials=10, seed=1)
    assert rep.trials == 10 and rep.seed == 1
    for stat in nm.STATISTICS:
        assert len(rep.null_distribution[stat]) == 10
        assert 1 / 11 <= rep.empirical_p[stat] <= 1


def test_tables_rebuilt_per_trial(region_seq, dictionary, reference, monkeypatch):
    calls = []
    real = nm.build_substitution

    def spy(freq, ref, key_id=0):
        calls.append(freq)
        return real(freq, ref, key_id)

    monkeypatch.setattr(nm, "build_substitution", spy)
    run_null(region_seq, 22, dictionary, reference, trials=5, mode="base-permutation", seed=0)
    assert len(calls) == 6
    assert any(c != calls[0] for c in calls[1:])


def test_trial_failure_reports_index(region_seq, dictionary, reference, monkeypatch):
    real = nm.key_statistics
    count = {"n": 0}

    def flaky(*args, **kwargs):
        count["n"] += 1
        if count["n"] == 4:
            raise RuntimeError("boom")
        return real(*args, **kwargs)

    monkeypatch.setattr(nm, "key_statistics", flaky)
    with pytest.raises(nm.TrialFailure) as exc:
        run_null(region_seq, 1, dictionary, reference, trials=5)
    assert exc.value.trial == 2


def test_two_letter_rate_matches_analytic(dictionary):
    """Simulated hit rate of a fixed word tracks (L - 1) / 26**2 under uniform letters."""
    rng = np.random.default_rng(3)
    length = 3_000
    d = nm.Dictionary(["IT"])
    hits = [len(d.match_arrays((rng.integers(0, 26, length) + 65).astype(np.uint8).tobytes().decode())[0])
            for _ in range(300)]
    expected = (length - 1) / 676
    assert abs(np.mean(hits) - expected) < 4 * np.sqrt(expected / 300)


def test_random_sequence_helper():
    assert len(random_bases(100, 1)) == 100
