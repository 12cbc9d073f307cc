import itertools

import pytest

from conftest import random_matrix
from perfphylo import (
    Character,
    CharacterMatrix,
    DomainError,
    TaxonSet,
    counterexample,
    decide_pp,
    displays_all,
    fitch_example,
    same_topology,
    splits,
)
from perfphylo.solver import (
    binary_matrix_test,
    enumerate_all_trees,
    enumerate_binary_trees,
    enumerate_compatible_trees,
    four_gamete_pair_test,
    minimal_obstructions,
    num_binary_trees,
    triple_test_3state,
)


@pytest.mark.parametrize("n,count", [(3, 1), (4, 3), (5, 15), (6, 105), (8, 10395)])
def test_binary_tree_counts(n, count):
    taxa = TaxonSet(tuple(f"x{k}" for k in range(n)))
    assert num_binary_trees(n) == count
    seen = {splits(t) for t in enumerate_binary_trees(taxa)}
    assert len(seen) == count


def test_all_tree_counts():
    # unrooted leaf-labelled trees of any resolution: 1, 4, 26, 236
    for n, count in [(3, 1), (4, 4), (5, 26), (6, 236)]:
        taxa = TaxonSet(tuple(f"x{k}" for k in range(n)))
        assert len(enumerate_all_trees(taxa)) == count


def test_trivial_matrices():
    taxa = TaxonSet(("p",))
    v = decide_pp(CharacterMatrix(taxa, ()))
    assert v.compatible
    taxa = TaxonSet(("p", "q", "r"))
    chi = Character.from_states(taxa, [{"p", "q"}, {"r"}])
    v = decide_pp(CharacterMatrix(taxa, (chi,)))
    assert v.compatible and displays_all(v.witness, [chi])


def test_unknown_mode_rejected():
    with pytest.raises(DomainError):
        decide_pp(fitch_example(), mode="fast")


def test_budget_gives_undecided():
    v = decide_pp(counterexample(6).matrix, "branch-and-bound", budget=10)
    assert v.undecided and v.witness is None


def test_modes_agree_on_random_matrices(rng):
    for _ in range(150):
        m = random_matrix(rng, rng.randint(3, 6), rng.randint(1, 4), rng.choice([2, 3, 4]), 0.15)
        a = decide_pp(m, "exhaustive")
        b = decide_pp(m, "branch-and-bound")
        assert a.status == b.status
        for v in (a, b):
            if v.compatible:
                assert displays_all(v.witness, m)


def test_binary_search_agrees_with_multifurcating_trees(rng):
    all_trees = {n: enumerate_all_trees(TaxonSet(tuple(f"t{k}" for k in range(n)))) for n in (3, 4, 5)}
    for _ in range(60):
        n = rng.randint(3, 5)
        m = random_matrix(rng, n, rng.randint(1, 4), rng.choice([2, 3]), 0.1)
        any_tree = any(displays_all(t, m) for t in all_trees[n])
        assert decide_pp(m).compatible == any_tree


def test_four_gamete():
    taxa = TaxonSet(("p", "q", "r", "s"))
    c1 = Character.from_states(taxa, [{"p", "q"}, {"r", "s"}])
    c2 = Character.from_states(taxa, [{"p", "r"}, {"q", "s"}])
    c3 = Character.from_states(taxa, [{"p"}, {"q", "r", "s"}])
    assert not four_gamete_pair_test(c1, c2)
    assert four_gamete_pair_test(c1, c3)
    with pytest.raises(DomainError):
        four_gamete_pair_test(c1, Character.from_states(taxa, [{"p"}, {"q"}, {"r", "s"}]))


def test_binary_and_triple_tests_agree_with_search(rng):
    for _ in range(80):
        m = random_matrix(rng, rng.randint(3, 7), rng.randint(1, 5), 2)
        assert binary_matrix_test(m) == decide_pp(m).compatible
    for _ in range(40):
        m = random_matrix(rng, rng.randint(3, 6), rng.randint(1, 5), 3)
        assert triple_test_3state(m) == decide_pp(m).compatible


def test_fitch_pairs_have_unique_witnesses():
    m = fitch_example()
    assert decide_pp(m).incompatible
    for pair in itertools.combinations(range(3), 2):
        trees = [t for t in enumerate_binary_trees(m.taxa) if displays_all(t, m.subset(pair))]
        assert len(trees) == 1


def test_enumerate_compatible_trees_limit():
    m = counterexample(6).matrix.without("Omega_B")
    trees = enumerate_compatible_trees(m)
    assert trees.complete and len(trees) == 9
    part = enumerate_compatible_trees(m, limit=3)
    assert len(part) == 3 and not part.complete
    for t in part:
        assert any(same_topology(t, u) for u in trees)


def test_obstructions():
    m = fitch_example()
    obs = minimal_obstructions(m, 3)
    assert [o.subset for o in obs] == [(0, 1, 2)] and obs.complete
    assert minimal_obstructions(m, 2) == []
    c4 = counterexample(4).matrix
    assert [o.subset for o in minimal_obstructions(c4, 4)] == [(0, 1, 2, 3)]
    assert minimal_obstructions(m.subset([0, 1]), 2) == []


def test_obstructions_are_minimal(rng):
    for _ in range(25):
        m = random_matrix(rng, rng.randint(4, 6), rng.randint(2, 5), 3)
        for ob in minimal_obstructions(m, len(m)):
            assert decide_pp(m.subset(ob.subset)).incompatible
            for k in range(len(ob.subset)):
                rest = ob.subset[:k] + ob.subset[k + 1:]
                assert decide_pp(m.subset(rest)).compatible
