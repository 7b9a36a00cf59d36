"""Key streams, each checked against a slow per-segment reference written from scratch."""

import itertools
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_bases
from dnacipher.errors import CountOverflow, UnknownKey
from dnacipher.keystreams import (
    KEYS,
    MarkerPredicate,
    combination_primes,
    digit_distance_stream,
    divisible_permutations,
    encode_combination,
    encode_composition,
    key_stream,
    marker_distance_stream,
    next_higher_distance_stream,
    prime_stream,
    rotation_canonical_stream,
    symbol_label,
)
from dnacipher.segmentation import Segmentation, compositions_of, partitions, segment

MARK = "AAAAATTTTT"  # (5, 5, 0, 0) -> 0055
FILL = "AAAAAAAAAT"  # (9, 1, 0, 0) -> 0019


def trial_division(n):
    return n > 1 and all(n % d for d in range(2, n))


# --- naive reference implementations ----------------------------------------


def ref_counts(bases, width=10):
    n = len(bases) // width
    return [tuple(bases[i * width : (i + 1) * width].count(b) for b in "ATGC") for i in range(n)]


def gaps(markers):
    return [b - a for a, b in zip(markers, markers[1:])]


def ref_marker(counts, key):
    def is_perm(x, y):
        return sorted(x) == sorted(y)

    n = len(counts)
    preds = {
        3: lambda i: sorted(counts[i]) in ([0, 0, 5, 5], [2, 2, 3, 3], [0, 2, 3, 5], [0, 0, 3, 7]),
        4: lambda i: counts[i][0] == counts[i][2] and counts[i][1] == counts[i][3],
        5: lambda i: sorted(counts[i]) == [1, 2, 3, 4],
        6: lambda i: sorted(counts[i]) in ([0, 0, 2, 8], [0, 0, 5, 5], [0, 2, 3, 5]),
        7: lambda i: sorted(counts[i])[0] == 0 and sorted(counts[i])[1] + sorted(counts[i])[2] == sorted(counts[i])[3],
        8: lambda i: counts[i] in [(2, 0, 3, 5), (2, 0, 8, 0), (1, 0, 3, 6), (0, 5, 0, 5)],
        9: lambda i: i + 2 < n and is_perm(counts[i], counts[i + 2]),
        11: lambda i: i + 1 < n and is_perm(counts[i], counts[i + 1]),
        12: lambda i: sorted(counts[i]) in ([1, 3, 3, 3], [2, 2, 2, 4], [0, 0, 5, 5], [1, 1, 3, 5], [2, 2, 3, 3],
                                            [1, 1, 4, 4]) or counts[i] in [(3, 3, 0, 4), (4, 4, 0, 2)],
        18: lambda i: 5 in counts[i],
        19: lambda i: int("".join(map(str, counts[i]))) % 4 == 0,
    }
    return gaps([i for i in range(n) if preds[key](i)])


def ref_stream(bases, key):
    counts = ref_counts(bases)
    if key == 1:
        return [partitions(10).index(tuple(sorted(c))) for c in counts]
    if key == 2:
        out = []
        for c in counts:
            digits = [d for d in c if 0 < d < 10]
            cands = set(digits)
            for x, y in itertools.permutations(range(len(digits)), 2):
                cands.add(int(f"{digits[x]}{digits[y]}"))
            out += sorted(p for p in cands if trial_division(p))
        return out
    if key in (10, 13, 14, 15, 16, 17):
        digit = {10: 0, 13: 1, 14: 5, 15: 2, 16: 3, 17: 4}[key]
        text = "".join("".join(map(str, c)) for c in counts)
        return gaps([i for i, ch in enumerate(text) if ch == str(digit)])
    if key == 20:
        vals = [int("".join(f"{x}" for x in c)) if max(c) < 10 else c[0] * 1000 + c[1] * 100 + c[2] * 10 + c[3]
                for c in counts]
        out = []
        for i, v in enumerate(vals):
            for j in range(i + 1, len(vals)):
                if vals[j] > v:
                    out.append(j - i)
                    break
        return out
    if key == 21:
        return [compositions_of(10).index(min(c[r:] + c[:r] for r in range(4))) for c in counts]
    if key == 22:
        return [abs(a * t - c * g) for a, t, g, c in counts]
    return ref_marker(counts, key)


@pytest.mark.parametrize("key", sorted(KEYS))
@pytest.mark.parametrize("seed", [1, 2])
def test_matches_naive_reference(key, seed):
    bases = random_bases(6_000, seed)
    assert key_stream(key, segment(bases)).tolist() == ref_stream(bases, key)


def test_biased_input_reference():
    # low-complexity input exercises counts of 10 and rare markers
    rng = np.random.default_rng(5)
    bases = "".join(rng.choice(["AAAAAAAAAA", "GGGGGGGGGG", MARK, "AATTGGGCCC", "TTTTTCCCCC", FILL], 400))
    for key in KEYS:
        assert key_stream(key, segment(bases)).tolist() == ref_stream(bases, key), key


# --- spec examples --------------------------------------------------------------


def test_key_dispatch_examples():
    segs = segment(MARK + "ACGTACGTAC").segments
    assert key_stream(1, segs).tolist() == [encode_combination((0, 0, 5, 5)), encode_combination((2, 2, 3, 3))]
    assert key_stream(22, segs).tolist() == [25, 0]
    with pytest.raises(UnknownKey):
        key_stream(23, segs)


def test_combination_labels():
    s = key_stream(1, segment(MARK + "ACGTACGTAC" + "G" * 10))
    assert [symbol_label(1, x, 10) for x in s.tolist()] == ["0055", "2233", "0-0-0-10"]


@pytest.mark.parametrize(
    "digits, primes",
    [((0, 0, 3, 7), [3, 7, 37, 73]), ((0, 0, 5, 5), [5]), ((0, 0, 0, 10), [])],
)
def test_prime_examples(digits, primes):
    assert combination_primes(digits) == primes


def test_prime_positions_increase_within_segment():
    s = prime_stream(segment("AAATTTTTTT" + "AAATTTTTTT"))  # 0037 twice
    assert s.tolist() == [3, 7, 37, 73] * 2
    assert np.all(np.diff(s.positions) > 0)


def _with_markers(idx, n=30):
    return "".join(MARK if i in idx else FILL for i in range(n))


def test_marker_distance_examples():
    k3 = KEYS[3]
    assert k3.build(segment(_with_markers({4, 9, 29}))).tolist() == [5, 20]
    assert k3.build(segment(_with_markers(set()))).tolist() == []
    assert k3.build(segment(_with_markers({0, 1}))).tolist() == [1]


def test_digit_distance_examples():
    seg = segment("TTTTTCCCCC" + "AATTTGGCCC")  # digits 0 5 0 5 2 3 2 3
    assert digit_distance_stream(seg, 0).tolist() == [2]
    assert digit_distance_stream(seg, 5).tolist() == [2]
    assert digit_distance_stream(seg, 9).tolist() == []


@pytest.mark.parametrize(
    "rows, symbols, truncated",
    [
        ([(1, 2, 3, 4), (1, 2, 3, 4), (5, 0, 0, 0)], [2, 1], 1),
        ([(4, 0, 0, 0), (3, 0, 0, 0), (2, 0, 0, 0)], [], 3),
        ([(1, 0, 0, 0), (2, 0, 0, 0), (3, 0, 0, 0)], [1, 1], 1),
    ],
)
def test_next_higher_examples(rows, symbols, truncated):
    s = next_higher_distance_stream(Segmentation.from_counts(rows))
    assert s.tolist() == symbols
    assert s.meta["truncated"] == truncated


def test_rotation_examples():
    c = Segmentation.from_counts([(5, 5, 0, 0), (2, 3, 2, 3), (0, 5, 5, 0)])
    s = rotation_canonical_stream(c)
    assert s.tolist() == [encode_composition((0, 0, 5, 5)), encode_composition((2, 3, 2, 3)),
                          encode_composition((0, 0, 5, 5))]
    assert s.meta["variant"] is True


@given(st.sampled_from(compositions_of(10)), st.integers(0, 3))
def test_rotation_invariance(counts, r):
    rotated = counts[r:] + counts[:r]
    a = rotation_canonical_stream(Segmentation.from_counts([counts])).tolist()
    b = rotation_canonical_stream(Segmentation.from_counts([rotated])).tolist()
    assert a == b


def test_determinant_bound_brute_force():
    worst = max(abs(a * t - c * g) for a, t, g, c in compositions_of(10))
    assert worst == 25
    s = key_stream(22, Segmentation.from_counts(compositions_of(10)))
    assert s.symbols.max() == 25 and s.symbols.min() == 0


# --- divisibility oracle -------------------------------------------------------------


def brute_divisible(digits, divisor):
    want = sorted(digits)
    return {v for v in range(10_000) if sorted(map(int, f"{v:04d}")) == want and v % divisor == 0}


@pytest.mark.parametrize("digits", [(1, 2, 2, 5), (0, 0, 5, 5), (1, 2, 3, 4), (2, 2, 3, 3)])
@pytest.mark.parametrize("divisor", [1, 3, 4, 7])
def test_divisible_permutations_brute_force(digits, divisor):
    assert divisible_permutations(digits, divisor) == brute_divisible(digits, divisor)


def test_divisible_permutations_examples():
    assert divisible_permutations((1, 2, 2, 5), 4) == {1252, 2152, 2512, 5212}
    # 5500 = 4 * 1375; the brute-force oracle above agrees
    assert divisible_permutations((0, 0, 5, 5), 4) == {5500} == brute_divisible((0, 0, 5, 5), 4)
    assert len(divisible_permutations((0, 0, 5, 5), 1)) == 6
    with pytest.raises(CountOverflow):
        divisible_permutations((0, 0, 0, 10), 4)


# --- invariants ---------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_determinism_and_marker_telescoping(seed):
    seg = segment(random_bases(3_000, seed))
    for key, spec in KEYS.items():
        a, b = key_stream(key, seg), key_stream(key, seg)
        assert a == b
        if "markers" in a.meta and len(a) > 0:
            assert a.symbols.sum() == a.positions[-1] - (a.positions[0] - a.symbols[0])
        if "occurrences" in a.meta:
            assert len(a) == max(a.meta["occurrences"] - 1, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_prime_stream_depends_on_combinations_only(seed):
    rng = np.random.default_rng(seed)
    bases = random_bases(2_000, seed)
    # shuffle bases inside every segment and relabel globally: combinations unchanged
    relabel = str.maketrans("ACGT", "".join(rng.permutation(list("ACGT"))))
    other = "".join("".join(rng.permutation(list(bases[i : i + 10]))) for i in range(0, 2_000, 10))
    other = other.translate(relabel)
    assert key_stream(1, segment(other)) == key_stream(1, segment(bases))
    assert key_stream(2, segment(other)) == key_stream(2, segment(bases))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations("ACGT"))
def test_permutation_markers_ignore_relabelling(seed, perm):
    bases = random_bases(3_000, seed)
    other = bases.translate(str.maketrans("ACGT", "".join(perm)))
    for key in (9, 11):
        assert key_stream(key, segment(other)) == key_stream(key, segment(bases))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_determinant_strand_symmetry(seed):
    bases = random_bases(3_000, seed)
    swapped = bases.translate(str.maketrans("ATCG", "TAGC"))
    assert key_stream(22, segment(swapped)) == key_stream(22, segment(bases))


def test_all_keys_on_region(region_seq):
    seg = segment(region_seq)
    assert len(seg) == 3_162
    start = time.perf_counter()
    lengths = {k: len(key_stream(k, seg)) for k in KEYS}
    assert time.perf_counter() - start < 1.0
    assert lengths[1] == lengths[21] == lengths[22] == 3_162
    assert all(v >= 0 for v in lengths.values())


def test_chunked_evaluation_matches_whole(region_seq):
    seg = segment(region_seq)
    half = len(seg) // 2
    left = Segmentation.from_counts(seg.counts[:half])
    right = Segmentation.from_counts(seg.counts[half:])
    for key in (1, 21, 22):
        merged = key_stream(key, left).tolist() + key_stream(key, right).tolist()
        assert merged == key_stream(key, seg).tolist()


def test_key8_loops_configurable():
    seg = segment("TTTTTCCCCC" + FILL + "TTTTTCCCCC" + "AATTTGGCCC" * 3)
    assert key_stream(8, seg).tolist() == [2]
    assert key_stream(8, seg, loops={(2, 3, 2, 3)}).tolist() == [1, 1]


def test_marker_predicate_kinds():
    seg = Segmentation.from_counts([(5, 0, 0, 5), (0, 5, 5, 0), (1, 2, 3, 4)])
    pred = MarkerPredicate(0, "contains-count", {"count": 5})
    assert marker_distance_stream(seg, pred).tolist() == [1]
    with pytest.raises(ValueError):
        MarkerPredicate(0, "nope").mask(seg)
