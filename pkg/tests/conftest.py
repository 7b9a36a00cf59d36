import numpy as np
import pytest

from dnacipher.lexicon import default_dictionary
from dnacipher.sequence_io import NucleotideSequence
from dnacipher.substitution import default_reference

ACCEPTANCE_RESULTS: list[str] = []


def random_bases(n: int, seed: int) -> str:
    rng = np.random.default_rng(seed)
    return np.frombuffer(b"ACGT", dtype=np.uint8)[rng.integers(0, 4, n)].tobytes().decode("ascii")


@pytest.fixture(scope="session")
def reference():
    return default_reference()


@pytest.fixture(scope="session")
def dictionary():
    return default_dictionary()


@pytest.fixture(scope="session")
def region_seq():
    """i.i.d. stand-in for the 31,621-base descending region."""
    return NucleotideSequence("standin", random_bases(31_621, 2024))


@pytest.fixture(scope="session")
def genome_fasta(tmp_path_factory):
    """A 168,903-base stand-in for AF158101 written as wrapped FASTA."""
    bases = random_bases(168_903, 7)
    path = tmp_path_factory.mktemp("genome") / "AF158101.fasta"
    body = "\n".join(bases[i : i + 70] for i in range(0, len(bases), 70))
    path.write_text(f">AF158101 stand-in genome\n{body}\n")
    return path


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
