import random

import pytest

from perfphylo import Character, CharacterMatrix, TaxonSet


def random_matrix(rng: random.Random, n_taxa: int, n_chars: int, r: int, gap_rate: float = 0.0):
    taxa = TaxonSet(tuple(f"t{k}" for k in range(n_taxa)))
    chars = []
    for c in range(n_chars):
        column = {}
        for x in taxa:
            column[x] = "?" if rng.random() < gap_rate else str(rng.randrange(r))
        chars.append(Character.from_column(taxa, column, f"c{c}"))
    return CharacterMatrix(taxa, tuple(chars))


@pytest.fixture
def rng():
    return random.Random(20261019)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
