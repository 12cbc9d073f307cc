"""
When does a tree display a character or a generalized quartet?

``displays_character`` is the literal check: the minimal subtrees spanning
the states must be pairwise vertex-disjoint. ``CladeIndex`` answers the
same question with bit operations after a linear-time pass over the tree
and backs ``displays_all`` and the solver; the two are cross-checked in
the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

from .core import (
    Character,
    CharacterMatrix,
    DomainError,
    Tree,
    normalize,
)


def _check_taxa(tree: Tree, chi: Character):
    if tree.taxa.as_set != chi.taxa.as_set:
        missing = sorted(chi.taxa.as_set ^ tree.taxa.as_set)
        raise DomainError(f"tree and character disagree on taxa: {missing}")


def displays_character(tree: Tree, chi: Character) -> bool:
    """True iff the spanning subtrees of the states are vertex-disjoint.

    Singleton states can never collide, so only states with two or more
    taxa are marked. Gapped taxa are ignored.
    """
    _check_taxa(tree, chi)
    used: set = set()
    for state in normalize(chi).states:
        if len(state) < 2:
            continue
        verts = tree.steiner_vertices(state)
        if used & verts:
            return False
        used |= verts
    return True


class CladeIndex:
    """Clade bitmasks of a tree rooted at one of its leaves.

    ``adj`` maps vertices to neighbours and ``leaf_bit`` maps leaf vertices
    to single-bit masks. Two disjoint taxon sets have vertex-disjoint
    spanning subtrees exactly when some edge separates them, and the
    smallest clade holding a set (found by binary lifting) is the only
    candidate edge worth testing on each side.
    """

    def __init__(self, adj: Mapping, leaf_bit: Mapping, root=None):
        if root is None:
            root = min(leaf_bit, key=leaf_bit.__getitem__)
        self.root = root
        self.root_bit = leaf_bit[root]
        self.bit_vertex = {b: v for v, b in leaf_bit.items()}
        parent = {root: root}
        order = [root]
        for v in order:
            for w in adj[v]:
                if w not in parent:
                    parent[w] = v
                    order.append(w)
        clade = {}
        for v in reversed(order):
            clade[v] = clade.get(v, 0) | leaf_bit.get(v, 0)
            if v != root:
                p = parent[v]
                clade[p] = clade.get(p, 0) | clade[v]
        self.clade = clade
        self.full = clade[root]
        up = [parent]
        depth = len(order).bit_length()
        for _ in range(depth):
            prev = up[-1]
            up.append({v: prev[prev[v]] for v in order})
        self.up = up

    def smallest_clade(self, mask: int) -> int:
        """Smallest clade containing ``mask``; ``mask`` must avoid the root."""
        low = mask & -mask
        v = self.bit_vertex[low]
        clade = self.clade
        if clade[v] & mask == mask:
            return clade[v]
        for table in reversed(self.up):
            w = table[v]
            if clade[w] & mask != mask:
                v = w
        return clade[self.up[0][v]]

    def separated(self, s: int, t: int) -> bool:
        """Is there an edge with ``s`` entirely on one side, ``t`` on the other?"""
        rb = self.root_bit
        if s & rb:
            return not self.smallest_clade(t) & s
        if t & rb:
            return not self.smallest_clade(s) & t
        return not self.smallest_clade(s) & t or not self.smallest_clade(t) & s

    def displays(self, masks: tuple[int, ...]) -> bool:
        """``masks`` are the informative states of one character."""
        k = len(masks)
        for i in range(k):
            for j in range(i + 1, k):
                if not self.separated(masks[i], masks[j]):
                    return False
        return True

    @classmethod
    def of_tree(cls, tree: Tree) -> "CladeIndex":
        adj = {v: tree.neighbors(v) for v in tree.vertices}
        bits = {tree.vertex_of(x): 1 << i for i, x in enumerate(tree.taxa.labels)}
        return cls(adj, bits)


class DisplayResult(NamedTuple):
    ok: bool
    failing: Character | None = None
    failing_index: int | None = None

    def __bool__(self):
        return self.ok


def displays_all(tree: Tree, matrix: CharacterMatrix | Iterable[Character]) -> DisplayResult:
    """Does ``tree`` display every character? Reports the first failure."""
    chars = list(matrix)
    for chi in chars:
        _check_taxa(tree, chi)
    if not chars:
        return DisplayResult(True)
    index = CladeIndex.of_tree(tree)
    for k, chi in enumerate(chars):
        masks = _masks_in(tree, chi)
        if not index.displays(masks):
            return DisplayResult(False, chi, k)
    return DisplayResult(True)


def _masks_in(tree: Tree, chi: Character) -> tuple[int, ...]:
    if chi.taxa.labels == tree.taxa.labels:
        return chi.informative_masks
    return tuple(tree.taxa.mask(s) for s in chi.states if len(s) >= 2)


def displayed_mask(tree: Tree, matrix: CharacterMatrix) -> int:
    """Bit ``k`` is set when the tree displays character ``k``."""
    index = CladeIndex.of_tree(tree)
    out = 0
    for k, chi in enumerate(matrix):
        if index.displays(_masks_in(tree, chi)):
            out |= 1 << k
    return out


# -- meets -----------------------------------------------------------------

@dataclass(frozen=True)
class MeetPoint:
    vertex: object
    on_path_between: tuple | None = None


def _steiner_for(tree: Tree, taxa: Iterable[str]) -> frozenset:
    taxa = frozenset(taxa)
    if not taxa:
        raise DomainError("the target taxon set must be non-empty")
    return tree.steiner_vertices(taxa)


def meets(tree: Tree, x: str, taxa: Iterable[str]) -> MeetPoint:
    """The vertex where leaf ``x`` joins the subtree spanning ``taxa``."""
    taxa = frozenset(taxa)
    if x in taxa:
        raise DomainError(f"{x!r} already belongs to the target set")
    sub = _steiner_for(tree, taxa)
    start = tree.vertex_of(x)
    parent = tree.parents_from(start)
    # first vertex of sub on any walk from x is the unique meet point
    v = next(iter(sub))
    meet = v
    while v is not None and v != start:
        if v in sub:
            meet = v
        v = parent[v]
    return MeetPoint(meet)


def meets_between(tree: Tree, x: str, taxa: Iterable[str], u, v) -> bool:
    """Does ``x`` meet ``T[taxa]`` on the closed path from ``u`` to ``v``?"""
    taxa = frozenset(taxa)
    sub = _steiner_for(tree, taxa)
    for w in (u, v):
        if w not in sub:
            raise DomainError(f"vertex {w!r} is not in the restricted subtree")
    point = meets(tree, x, taxa).vertex
    return point in tree.path(u, v)


# -- generalized quartets --------------------------------------------------

@dataclass(frozen=True)
class Quartet:
    """``S1 | S2 || S3 | S4`` over pairwise-disjoint non-empty taxon sets."""

    s1: frozenset[str]
    s2: frozenset[str]
    s3: frozenset[str]
    s4: frozenset[str]

    def __post_init__(self):
        parts = [frozenset(p) for p in (self.s1, self.s2, self.s3, self.s4)]
        for name, p in zip(("s1", "s2", "s3", "s4"), parts):
            object.__setattr__(self, name, p)
            if not p:
                raise DomainError("quartet parts must be non-empty")
        total = sum(len(p) for p in parts)
        if len(frozenset().union(*parts)) != total:
            raise DomainError("quartet parts must be pairwise disjoint")

    @property
    def parts(self) -> tuple[frozenset[str], ...]:
        return (self.s1, self.s2, self.s3, self.s4)

    def __str__(self):
        def fmt(p):
            return ",".join(sorted(p))
        return f"{fmt(self.s1)} | {fmt(self.s2)} || {fmt(self.s3)} | {fmt(self.s4)}"


def _vertex_separates(index: CladeIndex, children: Mapping, v, s: int, t: int) -> bool:
    """Does deleting ``v`` leave no component meeting both ``s`` and ``t``?"""
    directions = [index.clade[c] for c in children[v]]
    if v != index.root:
        directions.append(index.full & ~index.clade[v])
    for d in directions:
        if d & s and d & t:
            return False
    return True


def _edge_separates(index: CladeIndex, child, s: int, t: int) -> bool:
    c = index.clade[child]
    return (s & c == s and not t & c) or (t & c == t and not s & c)


def quartet_witness(tree: Tree, q: Quartet) -> tuple | None:
    """Vertices ``(u, v)`` certifying that ``tree`` displays ``q``, or None.

    ``u`` and ``v`` must be distinct internal vertices; the definition is
    silent on ``u == v`` but every use of it has a path of positive length.
    """
    known = tree.taxa.as_set
    for p in q.parts:
        if not p <= known:
            raise DomainError(f"quartet uses unknown taxa {sorted(p - known)}")
    index = CladeIndex.of_tree(tree)
    m1, m2, m3, m4 = (tree.taxa.mask(p) for p in q.parts)
    parent = index.up[0]
    children: dict = {v: [] for v in parent}
    for v, p in parent.items():
        if v != index.root:
            children[p].append(v)
    internal = [v for v in parent if tree.is_internal(v)]
    us = [v for v in internal if _vertex_separates(index, children, v, m1, m2)]
    vs = [v for v in internal if _vertex_separates(index, children, v, m3, m4)]
    left, right = m1 | m2, m3 | m4
    depth = {index.root: 0}
    for v in parent:
        if v != index.root:
            depth[v] = depth[parent[v]] + 1
    for u in us:
        for v in vs:
            if u == v:
                continue
            a, b = u, v
            ok = True
            while a != b and ok:
                if depth[a] < depth[b]:
                    a, b = b, a
                ok = _edge_separates(index, a, left, right)
                a = parent[a]
            if ok:
                return (u, v)
    return None


def displays_quartet(tree: Tree, q: Quartet) -> bool:
    return quartet_witness(tree, q) is not None
