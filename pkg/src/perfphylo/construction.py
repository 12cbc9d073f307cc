"""
The counterexample family, its lobster witness trees, two classic small
examples, and the taxon-copying and gap transforms.

Taxa are ``a1..an, b1..bn``. Internal vertices of the lobsters keep the
names ``u<i>``, ``v<i>``, ``uA`` and ``uB`` so that diagnostics can be
read against hand drawings; leaf vertices are named by their taxon.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import Character, CharacterMatrix, DomainError, TaxonSet, Tree


def _check_n(n):
    if not isinstance(n, int) or isinstance(n, bool) or n < 4 or n % 2:
        raise DomainError(f"n must be an even integer >= 4, got {n!r}")


@dataclass(frozen=True)
class FamilyInstance:
    n: int
    taxa: TaxonSet
    matrix: CharacterMatrix

    def __getitem__(self, name: str) -> Character:
        return self.matrix[name]

    @property
    def names(self) -> list[str]:
        return self.matrix.names


def _leaf(taxa: TaxonSet, c: str, i: int) -> frozenset[str]:
    if 1 <= i <= taxa.n:
        return frozenset((f"{c}{i}",))
    return frozenset()


def chi_character(taxa: TaxonSet, j: int) -> Character:
    n = taxa.n
    if not 2 <= j <= n - 2:
        raise DomainError(f"chi_j needs 2 <= j <= {n - 2}, got {j}")
    a = lambda i: _leaf(taxa, "a", i)  # noqa: E731
    b = lambda i: _leaf(taxa, "b", i)  # noqa: E731
    states = [
        taxa.prefix(j - 2),
        a(j - 1), b(j - 1),
        a(j) | a(j + 1), b(j) | b(j + 1),
        a(j + 2), b(j + 2),
        taxa.suffix(j + 3),
    ]
    return Character.from_states(taxa, states, f"chi_{j}")


def phi_character(taxa: TaxonSet, j: int) -> Character:
    n = taxa.n
    if not 3 <= j <= n - 1:
        raise DomainError(f"phi_j needs 3 <= j <= {n - 1}, got {j}")
    # even j pairs the b's on the left and the a's on the right; odd j the reverse
    left, right = ("b", "a") if j % 2 == 0 else ("a", "b")
    p = lambda i: _leaf(taxa, left, i)  # noqa: E731
    q = lambda i: _leaf(taxa, right, i)  # noqa: E731
    states = [
        taxa.prefix(j - 3) | p(j - 2) | p(j - 1),
        q(j - 2), q(j - 1),
        p(j), p(j + 1),
        q(j) | q(j + 1) | taxa.suffix(j + 2),
    ]
    return Character.from_states(taxa, states, f"phi_{j}")


def omega_a(taxa: TaxonSet) -> Character:
    first = frozenset(("a1", "b1", "b2"))
    return Character.from_states(taxa, [first, taxa.as_set - first], "Omega_A")


def omega_b(taxa: TaxonSet) -> Character:
    n = taxa.n
    last = frozenset((f"a{n - 1}", f"a{n}", f"b{n}"))
    return Character.from_states(taxa, [taxa.as_set - last, last], "Omega_B")


def counterexample(n: int) -> FamilyInstance:
    """The 2n - 4 characters ``Omega_A, chi_2.., phi_3.., Omega_B`` on 2n taxa."""
    _check_n(n)
    taxa = TaxonSet.structured(n)
    chars = [omega_a(taxa)]
    chars += [chi_character(taxa, j) for j in range(2, n - 1)]
    chars += [phi_character(taxa, j) for j in range(3, n)]
    chars.append(omega_b(taxa))
    return FamilyInstance(n, taxa, CharacterMatrix(taxa, tuple(chars)))


def small_example() -> CharacterMatrix:
    """The four-character, eight-taxon instance (the family at n = 4)."""
    return counterexample(4).matrix


FITCH_SEQUENCES = {
    "x1": "AAA",
    "x2": "ACC",
    "x3": "CGC",
    "x4": "CCG",
    "x5": "GAG",
}


def matrix_from_sequences(seqs: dict[str, str], names=None) -> CharacterMatrix:
    """Column-wise character matrix from equal-length state strings."""
    taxa = TaxonSet(tuple(seqs))
    lengths = {len(s) for s in seqs.values()}
    if len(lengths) != 1:
        raise DomainError("sequences must have equal length")
    (m,) = lengths
    names = names or [f"chi_{k + 1}" for k in range(m)]
    chars = tuple(
        Character.from_column(taxa, {x: s[k] for x, s in seqs.items()}, names[k])
        for k in range(m)
    )
    return CharacterMatrix(taxa, chars)


def fitch_example() -> CharacterMatrix:
    return matrix_from_sequences(FITCH_SEQUENCES)


# -- lobsters --------------------------------------------------------------

class _Builder:
    def __init__(self):
        self.edges = []

    def path(self, *vs):
        self.edges += list(zip(vs, vs[1:]))

    def attach(self, v, *leaves):
        self.edges += [(v, x) for x in leaves]


def _cherry(i: int, a_like: bool) -> tuple[str, str]:
    c = "a" if a_like else "b"
    return (f"{c}{i}", f"{c}{i + 1}")


def _a_side(j: int) -> tuple[str, str]:
    # cherry hanging from v_j where the tree looks like A
    return _cherry(j, a_like=(j % 2 == 0))


def _b_side(j: int) -> tuple[str, str]:
    return _cherry(j, a_like=(j % 2 == 1))


def _finish(b: _Builder, n: int) -> Tree:
    taxa = TaxonSet.structured(n)
    return Tree(b.edges, {x: x for x in taxa}, taxa)


def lobster_A(n: int) -> Tree:
    _check_n(n)
    b = _Builder()
    b.path("a1", *[f"u{i}" for i in range(1, n)], f"a{n}")
    for i in range(1, n):
        b.path(f"u{i}", f"v{i}")
        b.attach(f"v{i}", *_a_side(i))
    return _finish(b, n)


def lobster_B(n: int) -> Tree:
    _check_n(n)
    b = _Builder()
    b.path("b1", *[f"u{i}" for i in range(1, n)], f"b{n}")
    for i in range(1, n):
        b.path(f"u{i}", f"v{i}")
        b.attach(f"v{i}", *_b_side(i))
    return _finish(b, n)


def lobster_AiB(n: int, i: int) -> Tree:
    """Looks like A on ``X<=i`` and like B on ``X>=i+1``; fails ``chi_i``."""
    _check_n(n)
    if not 2 <= i <= n - 2:
        raise DomainError(f"A_iB needs 2 <= i <= {n - 2}, got {i}")
    b = _Builder()
    b.path("a1", *[f"u{j}" for j in range(1, i)], "uA", "uB",
           *[f"u{j}" for j in range(i + 1, n)], f"b{n}")
    if i % 2 == 0:
        b.attach("uA", f"a{i}")
        b.attach("uB", f"b{i + 1}")
    else:
        b.attach("uA", f"b{i}")
        b.attach("uB", f"a{i + 1}")
    for j in range(1, n):
        if j == i:
            continue
        b.path(f"u{j}", f"v{j}")
        b.attach(f"v{j}", *(_a_side(j) if j < i else _b_side(j)))
    return _finish(b, n)


def lobster_AcaretB(n: int, i: int) -> Tree:
    """Looks like A on ``X<=i-1`` and like B on ``X>=i``; fails ``phi_i``.

    Valid for ``3 <= i <= n-1``, the range over which it is used as a
    witness.
    """
    _check_n(n)
    if not 3 <= i <= n - 1:
        raise DomainError(f"A^iB needs 3 <= i <= {n - 1}, got {i}")
    b = _Builder()
    b.path("a1", *[f"u{j}" for j in range(1, i - 1)], "uA", "uB",
           *[f"u{j}" for j in range(i, n)], f"b{n}")
    if i % 2 == 0:
        b.attach("uA", f"a{i}")
        b.attach("uB", f"b{i - 1}")
    else:
        b.attach("uA", f"b{i}")
        b.attach("uB", f"a{i - 1}")
    for j in range(1, n):
        if j == i - 1:
            continue
        b.path(f"u{j}", f"v{j}")
        b.attach(f"v{j}", *(_a_side(j) if j < i - 1 else _b_side(j)))
    return _finish(b, n)


def witnesses(n: int) -> dict[str, Tree]:
    """Map each character name to the tree displaying all the others."""
    _check_n(n)
    out = {"Omega_B": lobster_A(n), "Omega_A": lobster_B(n)}
    for i in range(2, n - 1):
        out[f"chi_{i}"] = lobster_AiB(n, i)
    for i in range(3, n):
        out[f"phi_{i}"] = lobster_AcaretB(n, i)
    return out


# -- transforms ------------------------------------------------------------

def duplicate_taxon(matrix: CharacterMatrix, x: str, k: int = 1) -> CharacterMatrix:
    """Add ``k`` copies of taxon ``x`` sharing its state in every character."""
    if x not in matrix.taxa:
        raise DomainError(f"unknown taxon {x!r}")
    if not isinstance(k, int) or k < 1:
        raise DomainError(f"copy count must be a positive integer, got {k!r}")
    labels = list(matrix.taxa.labels)
    copies = []
    j = 1
    while len(copies) < k:
        name = f"{x}.{j}"
        if name not in matrix.taxa:
            copies.append(name)
        j += 1
    pos = labels.index(x) + 1
    labels[pos:pos] = copies
    taxa = TaxonSet(tuple(labels))
    chars = []
    for chi in matrix:
        states = tuple(s | frozenset(copies) if x in s else s for s in chi.states)
        chars.append(Character(taxa, states, chi.name, chi.symbols))
    return CharacterMatrix(taxa, tuple(chars))


def gapify(matrix: CharacterMatrix) -> CharacterMatrix:
    """Turn every singleton state into a gap."""
    chars = []
    for chi in matrix:
        keep = [(k, s) for k, s in enumerate(chi.states) if len(s) >= 2]
        symbols = tuple(chi.symbols[k] for k, _ in keep) if chi.symbols is not None else None
        chars.append(Character(chi.taxa, tuple(s for _, s in keep), chi.name, symbols))
    return CharacterMatrix(matrix.taxa, tuple(chars))


def gapify_character(chi: Character) -> Character:
    return gapify(CharacterMatrix(chi.taxa, (chi,)))[0]
