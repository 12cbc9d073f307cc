"""
Exact perfect-phylogeny decisions by tree search.

All searches build binary trees by inserting taxa one at a time into
every edge of the current tree. A binary search is complete: any tree
displaying a set of characters can be refined to a binary tree that
still displays them. Branch-and-bound drops a partial tree as soon as
it fails to display the characters restricted to the taxa inserted so
far; restriction never turns a displayed character into an undisplayed
one, so no solution is lost.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .core import (
    Character,
    CharacterMatrix,
    DomainError,
    TaxonSet,
    Tree,
    normalize,
    splits,
)
from .display import CladeIndex, displays_all

log = logging.getLogger(__name__)

MODES = ("exhaustive", "branch-and-bound", "auto")
AUTO_EXHAUSTIVE_MAX = 9


class BudgetExceeded(Exception):
    pass


@dataclass
class SearchStats:
    trees_explored: int = 0
    pruned: int = 0
    elapsed: float = 0.0


@dataclass
class Verdict:
    status: str  # "compatible" | "incompatible" | "undecided"
    witness: Tree | None = None
    reason: str = ""
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def compatible(self) -> bool:
        return self.status == "compatible"

    @property
    def incompatible(self) -> bool:
        return self.status == "incompatible"

    @property
    def undecided(self) -> bool:
        return self.status == "undecided"


@dataclass(frozen=True)
class Obstruction:
    subset: tuple[int, ...]
    minimal: bool = True


class ObstructionList(list):
    """List of obstructions; ``complete`` is False if the budget ran out."""

    def __init__(self, items=(), complete=True):
        super().__init__(items)
        self.complete = complete


class TreeList(list):
    """List of trees; ``complete`` is False if a limit or budget cut it short."""

    def __init__(self, items=(), complete=True):
        super().__init__(items)
        self.complete = complete


# -- low level search ------------------------------------------------------

class _Search:
    """Leaf-insertion search over binary trees on integer vertices.

    Taxon ``order[k]`` is leaf vertex ``order[k]`` (its index in the taxon
    set); internal vertices are numbered from ``len(taxa)`` upwards.
    """

    def __init__(self, taxa: TaxonSet, characters: Sequence[Character],
                 order: Sequence[int] | None = None, prune: bool = True,
                 budget: int | None = None):
        self.taxa = taxa
        self.n = len(taxa)
        self.order = list(order) if order is not None else list(range(self.n))
        if sorted(self.order) != list(range(self.n)):
            raise DomainError("insertion order must be a permutation of the taxa")
        self.prune = prune
        self.budget = budget
        self.stats = SearchStats()
        masks = [c.informative_masks for c in characters]
        # informative states restricted to each inserted prefix
        self.prefix_masks = []
        inserted = 0
        for k in range(self.n):
            inserted |= 1 << self.order[k]
            per_char = []
            for ms in masks:
                restricted = tuple(m & inserted for m in ms if (m & inserted).bit_count() >= 2)
                if len(restricted) >= 2:
                    per_char.append(restricted)
            self.prefix_masks.append(per_char)
        self.full_masks = [ms for ms in masks if len(ms) >= 2]

    def _tick(self):
        self.stats.trees_explored += 1
        if self.budget is not None and self.stats.trees_explored > self.budget:
            raise BudgetExceeded

    def _displays(self, edges: list, k: int, masks) -> bool:
        if not masks:
            return True
        adj: dict[int, list[int]] = {}
        for u, v in edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        bits = {self.order[j]: 1 << self.order[j] for j in range(k + 1)}
        index = CladeIndex(adj, bits, root=self.order[0])
        for ms in masks:
            if not index.displays(ms):
                return False
        return True

    def trees(self) -> Iterator[list]:
        """Yield edge lists of full trees that pass the active checks."""
        n, order = self.n, self.order
        if n < 3:
            raise DomainError("tree search needs at least 3 taxa")
        centre = n
        edges = [(centre, order[0]), (centre, order[1]), (centre, order[2])]
        self._tick()
        if self.prune and not self._displays(edges, 2, self.prefix_masks[2]):
            self.stats.pruned += 1
            return
        yield from self._grow(edges, 3, n + 1)

    def _grow(self, edges: list, k: int, next_id: int) -> Iterator[list]:
        n = self.n
        if k == n:
            if self.prune or self._displays(edges, n - 1, self.full_masks):
                yield edges
            return
        leaf = self.order[k]
        w = next_id
        for e in range(len(edges)):
            x, y = edges[e]
            edges[e] = (x, w)
            edges.append((w, y))
            edges.append((w, leaf))
            self._tick()
            if not self.prune or self._displays(edges, k, self.prefix_masks[k]):
                yield from self._grow(edges, k + 1, next_id + 1)
            else:
                self.stats.pruned += 1
            edges.pop()
            edges.pop()
            edges[e] = (x, y)

    def to_tree(self, edges: list) -> Tree:
        labels = {i: x for i, x in enumerate(self.taxa.labels)}
        return Tree(list(edges), labels, self.taxa)


def _small_tree(taxa: TaxonSet) -> Tree:
    labels = {i: x for i, x in enumerate(taxa.labels)}
    if len(taxa) == 1:
        return Tree([], labels, taxa)
    return Tree([(0, 1)], labels, taxa)


def _order_for(taxa: TaxonSet, order) -> list[int] | None:
    if order is None:
        return None
    return [taxa.index[x] if isinstance(x, str) else int(x) for x in order]


# -- public API ------------------------------------------------------------

def enumerate_binary_trees(taxa: TaxonSet | Sequence[str]) -> Iterator[Tree]:
    """Every unrooted binary tree on ``taxa``, each exactly once."""
    if not isinstance(taxa, TaxonSet):
        taxa = TaxonSet(tuple(taxa))
    if len(taxa) < 3:
        raise DomainError("binary trees need at least 3 taxa")
    search = _Search(taxa, [], prune=False)
    for edges in search.trees():
        yield search.to_tree(edges)


def num_binary_trees(n_taxa: int) -> int:
    """``(2n - 5)!!`` unrooted binary trees on ``n`` labelled leaves."""
    out = 1
    for k in range(3, 2 * n_taxa - 4, 2):
        out *= k
    return out


def enumerate_all_trees(taxa: TaxonSet | Sequence[str]) -> list[Tree]:
    """All trees on ``taxa``, multifurcating ones included.

    Built by contracting every subset of internal edges of every binary
    tree and keeping one tree per split set; only practical for small
    taxon sets.
    """
    if not isinstance(taxa, TaxonSet):
        taxa = TaxonSet(tuple(taxa))
    seen = {}
    for tree in enumerate_binary_trees(taxa):
        inner = [e for e in tree.edges if tree.is_internal(e[0]) and tree.is_internal(e[1])]
        for r in range(len(inner) + 1):
            for chosen in itertools.combinations(inner, r):
                t = contract(tree, chosen)
                key = splits(t)
                if key not in seen:
                    seen[key] = t
    return [seen[k] for k in sorted(seen, key=_split_key(taxa))]


def contract(tree: Tree, edges: Iterable[tuple]) -> Tree:
    """Contract internal edges, merging each into its first endpoint."""
    rep = {v: v for v in tree.vertices}

    def find(v):
        while rep[v] != v:
            v = rep[v]
        return v

    for u, v in edges:
        if not (tree.is_internal(u) and tree.is_internal(v)):
            raise DomainError("only internal edges can be contracted")
        rep[find(v)] = find(u)
    new_edges = []
    for u, v in tree.edges:
        a, b = find(u), find(v)
        if a != b:
            new_edges.append((a, b))
    return Tree(new_edges, tree.leaf_label, tree.taxa)


def _split_key(taxa: TaxonSet):
    def key(split_set):
        return sorted(tuple(sorted(taxa.index[x] for x in s)) for s in split_set)
    return key


def canonical_sort(trees: Iterable[Tree]) -> list[Tree]:
    trees = list(trees)
    if not trees:
        return trees
    key = _split_key(trees[0].taxa)
    return sorted(trees, key=lambda t: key(splits(t)))


def decide_pp(matrix: CharacterMatrix, mode: str = "auto", budget: int | None = None,
              order: Sequence | None = None) -> Verdict:
    """Decide whether ``matrix`` admits a perfect phylogeny.

    ``budget`` caps the number of (partial) trees examined; running out
    yields an ``undecided`` verdict. ``order`` is the taxon insertion
    order for branch-and-bound (labels or indices).
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {MODES}")
    taxa = matrix.taxa
    chars = [normalize(c) for c in matrix]
    if mode == "auto":
        mode = "exhaustive" if len(taxa) <= AUTO_EXHAUSTIVE_MAX else "branch-and-bound"
    start = time.perf_counter()
    if len(taxa) < 3:
        tree = _small_tree(taxa)
        stats = SearchStats(1, 0, time.perf_counter() - start)
        return _checked(Verdict("compatible", tree, "trivial", stats), chars)
    search = _Search(taxa, chars, _order_for(taxa, order),
                     prune=(mode == "branch-and-bound"), budget=budget)
    try:
        for edges in search.trees():
            search.stats.elapsed = time.perf_counter() - start
            return _checked(Verdict("compatible", search.to_tree(edges), mode, search.stats), chars)
    except BudgetExceeded:
        search.stats.elapsed = time.perf_counter() - start
        return Verdict("undecided", None, "budget", search.stats)
    search.stats.elapsed = time.perf_counter() - start
    return Verdict("incompatible", None, f"exhausted-search ({mode})", search.stats)


def _checked(verdict: Verdict, chars: list[Character]) -> Verdict:
    result = displays_all(verdict.witness, chars)
    if not result:
        raise AssertionError(f"witness fails {result.failing.name!r}; search is broken")
    return verdict


def is_compatible(matrix: CharacterMatrix, mode: str = "auto") -> bool:
    verdict = decide_pp(matrix, mode)
    return verdict.compatible


def enumerate_compatible_trees(matrix: CharacterMatrix, limit: int | None = None,
                               budget: int | None = None, order: Sequence | None = None) -> TreeList:
    """Binary trees displaying every character, in canonical split order."""
    taxa = matrix.taxa
    chars = [normalize(c) for c in matrix]
    if len(taxa) < 3:
        return TreeList([_small_tree(taxa)])
    search = _Search(taxa, chars, _order_for(taxa, order), prune=True, budget=budget)
    found = []
    complete = True
    try:
        for edges in search.trees():
            if limit is not None and len(found) >= limit:
                complete = False
                break
            tree = search.to_tree(edges)
            _checked(Verdict("compatible", tree), chars)
            found.append(tree)
    except BudgetExceeded:
        complete = False
    return TreeList(canonical_sort(found), complete)


def _require_two_state(chi: Character):
    if not chi.is_full:
        raise DomainError(f"character {chi.name!r} has gaps")
    if normalize(chi).num_states > 2:
        raise DomainError(f"character {chi.name!r} has more than two states")


def four_gamete_pair_test(chi: Character, psi: Character) -> bool:
    """Two full binary characters are compatible unless all four
    state combinations occur."""
    _require_two_state(chi)
    _require_two_state(psi)
    if chi.taxa.as_set != psi.taxa.as_set:
        raise DomainError("characters are over different taxon sets")
    combos = sum(1 for s in normalize(chi).states for t in normalize(psi).states if s & t)
    return combos < 4


def binary_matrix_test(matrix: CharacterMatrix) -> bool:
    for chi in matrix:
        _require_two_state(chi)
    chars = list(matrix)
    return all(four_gamete_pair_test(c, d) for c, d in itertools.combinations(chars, 2))


def triple_test_3state(matrix: CharacterMatrix, mode: str = "auto") -> bool:
    """True iff every subset of at most three characters is compatible."""
    for chi in matrix:
        if not chi.is_full:
            raise DomainError(f"character {chi.name!r} has gaps")
        if normalize(chi).num_states > 3:
            raise DomainError(f"character {chi.name!r} has more than three states")
    k = min(3, len(matrix))
    for combo in itertools.combinations(range(len(matrix)), k):
        if not decide_pp(matrix.subset(combo), mode).compatible:
            return False
    return True


def minimal_obstructions(matrix: CharacterMatrix, max_size: int, mode: str = "auto",
                         budget: int | None = None) -> ObstructionList:
    """Inclusion-minimal incompatible character subsets of size <= ``max_size``.

    Subsets are visited by size. A subset containing a known obstruction
    is skipped; a compatible verdict comes with a witness tree, and every
    subset of the characters that witness displays is compatible too.
    """
    from .display import displayed_mask

    m = len(matrix)
    known: list[int] = []
    covered: list[int] = []  # display masks of witnesses found so far
    memo: dict[int, bool] = {}
    complete = True

    def compatible(mask: int) -> bool | None:
        if mask in memo:
            return memo[mask]
        if any(mask & c == mask for c in covered):
            memo[mask] = True
            return True
        idx = [k for k in range(m) if mask >> k & 1]
        verdict = decide_pp(matrix.subset(idx), mode, budget)
        if verdict.undecided:
            return None
        if verdict.compatible:
            covered.append(displayed_mask(verdict.witness, matrix))
        memo[mask] = verdict.compatible
        return verdict.compatible

    found = []
    for size in range(1, min(max_size, m) + 1):
        for combo in itertools.combinations(range(m), size):
            mask = sum(1 << k for k in combo)
            if any(mask & o == o for o in known):
                continue
            ok = compatible(mask)
            if ok is None:
                complete = False
                continue
            if ok:
                continue
            subs = [compatible(mask & ~(1 << k)) for k in combo] if size > 1 else []
            if any(s is None for s in subs):
                complete = False
            minimal = all(s is True for s in subs)
            if minimal:
                known.append(mask)
                found.append(Obstruction(combo, True))
    return ObstructionList(found, complete)
