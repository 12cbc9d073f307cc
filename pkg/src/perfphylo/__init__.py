"""Perfect phylogeny compatibility and the counterexample to local obstructions."""
from .construction import (
    FamilyInstance,
    counterexample,
    duplicate_taxon,
    fitch_example,
    gapify,
    lobster_A,
    lobster_AcaretB,
    lobster_AiB,
    lobster_B,
    small_example,
    witnesses,
)
from .core import (
    Character,
    CharacterMatrix,
    DomainError,
    MalformedCharacterError,
    NewickError,
    TaxonSet,
    Tree,
    normalize,
    parse_newick,
    restrict_character,
    restrict_tree,
    same_topology,
    splits,
    to_newick,
)
from .display import (
    Quartet,
    displays_all,
    displays_character,
    displays_quartet,
    meets,
    meets_between,
)
from .io import format_matrix, parse_matrix
from .solver import (
    Verdict,
    binary_matrix_test,
    decide_pp,
    enumerate_binary_trees,
    enumerate_compatible_trees,
    four_gamete_pair_test,
    is_compatible,
    minimal_obstructions,
    triple_test_3state,
)
from .verify import verify_paper, verify_theorem, verify_witness_suite

__version__ = "0.1.0"
