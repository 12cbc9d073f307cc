import random

import pytest

from perfphylo import (
    Character,
    CharacterMatrix,
    DomainError,
    counterexample,
    displays_character,
    lobster_A,
    lobster_B,
)
from perfphylo.construction import FamilyInstance
from perfphylo.solver import enumerate_compatible_trees
from perfphylo.verify import (
    base_case_trace,
    leave_one_out_covered,
    verify_base_case,
    verify_incompatibility_by_chain,
    verify_omega_conflict,
    verify_paper,
    verify_quartet_chain,
    verify_small,
    verify_theorem,
    verify_witness_suite,
)


@pytest.mark.parametrize("n", [4, 6, 8, 12])
def test_witness_suite_passes(n):
    fam = counterexample(n)
    reports = verify_witness_suite(n, fam)
    assert len(reports) == 2 * n - 4
    assert all(r.passed for r in reports)
    assert leave_one_out_covered(reports, fam)
    for r in reports:
        assert len(r.details["transcript"]) == 2 * n - 4


def test_small_exhaustive():
    r = verify_small(4)
    assert r.passed
    assert r.details["total"] == 10395 and r.details["full"] == 0
    assert all(r.details["figure_matches"].values())
    assert r.details["omega_pair_compatible"]
    with pytest.raises(DomainError):
        verify_small(6)


def test_quartet_chain_on_lobster_A():
    r = verify_quartet_chain(lobster_A(6), 6)
    assert r.passed
    assert r.details["quartets"]["Q_4"][0] == "a1,a2,a3,b1,b2,b3,b4 | b5 || a4 | a5"


def test_quartet_chain_over_all_premise_trees():
    fam = counterexample(6)
    trees = enumerate_compatible_trees(fam.matrix.without("phi_5", "Omega_B"))
    assert trees.complete and trees
    for t in trees:
        assert verify_quartet_chain(t, 6, fam).passed


def test_chain_precondition_rejected():
    with pytest.raises(DomainError):
        verify_quartet_chain(lobster_B(6), 6)
    with pytest.raises(DomainError):
        verify_quartet_chain(lobster_A(4), 4)


def test_omega_conflict():
    fam = counterexample(6)
    r = verify_omega_conflict(lobster_A(6), 6, fam)
    assert r.passed and r.details["phi_5"] and not r.details["Omega_B"]
    # lobster B shows phi_5 and Omega_B, so it cannot carry the final quartet
    b = lobster_B(6)
    assert displays_character(b, fam["phi_5"]) and displays_character(b, fam["Omega_B"])
    with pytest.raises(DomainError):
        verify_omega_conflict(b, 6, fam)


def test_base_case_and_chain_incompatibility():
    base = verify_base_case(6)
    assert base.passed and base.details["trees"] > 0
    chain = verify_incompatibility_by_chain(6)
    assert chain.passed and len(chain.details["trees"]) == 9


def test_base_case_trace_on_lobster():
    fam = counterexample(6)
    assert all(base_case_trace(lobster_A(6), fam.taxa).values())


def test_theorem_instances():
    assert verify_theorem(6, 7).passed
    assert verify_theorem(4, 3).passed
    with pytest.raises(DomainError):
        verify_theorem(6, 8)


def test_theorem_falls_back_when_search_is_cut_short():
    r = verify_theorem(8, 5, budget=50)
    assert r.passed
    assert r.details["certification"].startswith("lemma-suite verified")


def test_verify_paper_levels():
    assert all(r.passed for r in verify_paper(4, "full"))
    assert all(r.passed for r in verify_paper(8, "witnesses"))
    with pytest.raises(DomainError):
        verify_paper(6, "deep")


def _perturb(fam: FamilyInstance, rng: random.Random) -> FamilyInstance:
    chars = list(fam.matrix)
    k = rng.randrange(len(chars))
    chi = chars[k]
    x = rng.choice(fam.taxa.labels)
    states = [set(s) for s in chi.states]
    home = chi.state_of(x)
    # move x to another token already used in the column; a fresh token
    # only refines the character and cannot break any display
    j = rng.choice([j for j in range(len(states)) if j != home])
    states[home].discard(x)
    states[j].add(x)
    chars[k] = Character.from_states(fam.taxa, states, chi.name)
    return FamilyInstance(fam.n, fam.taxa, CharacterMatrix(fam.taxa, tuple(chars)))


def _moved_omega_a(fam):
    chi = fam["Omega_A"]
    states = [set(s) for s in chi.states]
    states[0].discard("b2")
    states[1].add("b2")
    chars = [Character.from_states(fam.taxa, states, "Omega_A") if c.name == "Omega_A" else c
             for c in fam.matrix]
    return FamilyInstance(fam.n, fam.taxa, CharacterMatrix(fam.taxa, tuple(chars)))


def test_negative_control_moved_omega_state():
    fam = counterexample(6)
    reports = verify_witness_suite(6, _moved_omega_a(fam))
    assert not all(r.passed for r in reports)


def test_negative_controls_detect_random_perturbations():
    rng = random.Random(7)
    fam = counterexample(8)
    caught = 0
    for _ in range(100):
        reports = verify_witness_suite(8, _perturb(fam, rng))
        caught += not all(r.passed for r in reports)
    assert caught >= 95
