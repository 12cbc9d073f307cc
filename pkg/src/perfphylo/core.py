"""
Taxon sets, characters, unrooted leaf-labelled trees and splits.

Everything here is immutable once built. Taxa are opaque strings; a
character is a list of disjoint state blocks, and any taxon that is not
in a block is treated as gapped (it constrains nothing).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence


class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


class MalformedCharacterError(DomainError):
    """Raised for characters whose states overlap or use unknown taxa."""


# A split is the side of an edge bipartition that holds the first taxon
# in label order.
Split = frozenset


@dataclass(frozen=True)
class TaxonSet:
    """An ordered set of taxon labels.

    ``TaxonSet.structured(n)`` builds the ``a1..an, b1..bn`` set used by
    the counterexample family, listed as ``a1, b1, a2, b2, ...`` so that
    label prefixes coincide with :meth:`prefix` blocks.
    """

    labels: tuple[str, ...]
    n: int | None = None

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if any(not isinstance(x, str) or not x for x in labels):
            raise DomainError("taxon labels must be non-empty strings")
        if len(set(labels)) != len(labels):
            raise DomainError("taxon labels must be pairwise distinct")
        if self.n is not None:
            if self.n < 4 or self.n % 2:
                raise DomainError(f"structured taxon set needs even n >= 4, got {self.n}")
            if set(labels) != {f"{c}{i}" for c in "ab" for i in range(1, self.n + 1)}:
                raise DomainError("structured taxon set must be exactly a1..an, b1..bn")

    @classmethod
    def structured(cls, n: int) -> "TaxonSet":
        if not isinstance(n, int) or n < 4 or n % 2:
            raise DomainError(f"n must be an even integer >= 4, got {n!r}")
        labels = []
        for i in range(1, n + 1):
            labels += [f"a{i}", f"b{i}"]
        return cls(tuple(labels), n)

    def __len__(self):
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, x) -> bool:
        return x in self.index

    @cached_property
    def index(self) -> dict[str, int]:
        return {x: i for i, x in enumerate(self.labels)}

    @cached_property
    def as_set(self) -> frozenset[str]:
        return frozenset(self.labels)

    def mask(self, taxa: Iterable[str]) -> int:
        """Bitmask of ``taxa`` with bit ``i`` for ``labels[i]``."""
        m = 0
        for x in taxa:
            m |= 1 << self.index[x]
        return m

    def unmask(self, mask: int) -> frozenset[str]:
        return frozenset(x for i, x in enumerate(self.labels) if mask >> i & 1)

    def sort(self, taxa: Iterable[str]) -> list[str]:
        return sorted(taxa, key=self.index.__getitem__)

    def subset(self, taxa: Iterable[str]) -> "TaxonSet":
        keep = set(taxa)
        unknown = keep - self.as_set
        if unknown:
            raise DomainError(f"unknown taxa: {sorted(unknown)}")
        return TaxonSet(tuple(x for x in self.labels if x in keep))

    # -- structured accessors -------------------------------------------

    def _require_structured(self):
        if self.n is None:
            raise DomainError("taxon set has no a_i/b_i structure")

    def a(self, i: int) -> str:
        self._require_structured()
        if not 1 <= i <= self.n:
            raise DomainError(f"a index {i} outside 1..{self.n}")
        return f"a{i}"

    def b(self, i: int) -> str:
        self._require_structured()
        if not 1 <= i <= self.n:
            raise DomainError(f"b index {i} outside 1..{self.n}")
        return f"b{i}"

    def pair(self, i: int) -> frozenset[str]:
        """``{a_i, b_i}``, or the empty set when ``i`` is out of range."""
        self._require_structured()
        if 1 <= i <= self.n:
            return frozenset((f"a{i}", f"b{i}"))
        return frozenset()

    def prefix(self, i: int) -> frozenset[str]:
        """All ``a_j, b_j`` with ``j <= i`` (empty for ``i <= 0``)."""
        self._require_structured()
        return frozenset().union(*(self.pair(j) for j in range(1, min(i, self.n) + 1)))

    def suffix(self, i: int) -> frozenset[str]:
        """All ``a_j, b_j`` with ``j >= i`` (empty for ``i > n``)."""
        self._require_structured()
        return frozenset().union(*(self.pair(j) for j in range(max(i, 1), self.n + 1)))


@dataclass(frozen=True)
class Character:
    """A partition of (part of) a taxon set into state blocks.

    ``symbols`` optionally records the token used for each state in a
    matrix file; it never takes part in comparisons.
    """

    taxa: TaxonSet
    states: tuple[frozenset[str], ...]
    name: str | None = field(default=None, compare=False)
    symbols: tuple[str, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        states = tuple(frozenset(s) for s in self.states)
        object.__setattr__(self, "states", states)
        for s in states:
            unknown = s - self.taxa.as_set
            if unknown:
                raise MalformedCharacterError(
                    f"character {self.name!r} uses unknown taxa {sorted(unknown)}"
                )
        if self.symbols is not None:
            symbols = tuple(self.symbols)
            if len(symbols) != len(states):
                raise MalformedCharacterError("one symbol per state is required")
            object.__setattr__(self, "symbols", symbols)

    @classmethod
    def from_states(cls, taxa: TaxonSet, states: Iterable[Iterable[str]], name=None) -> "Character":
        return normalize(cls(taxa, tuple(frozenset(s) for s in states), name))

    @classmethod
    def from_column(cls, taxa: TaxonSet, tokens: Mapping[str, str], name=None,
                    gaps=("?", "-")) -> "Character":
        """Build a character from one state token per taxon."""
        blocks: dict[str, set[str]] = {}
        for x in taxa:
            tok = tokens[x]
            if tok in gaps:
                continue
            blocks.setdefault(tok, set()).add(x)
        syms = tuple(blocks)
        return normalize(cls(taxa, tuple(frozenset(b) for b in blocks.values()), name, syms))

    @property
    def covered(self) -> frozenset[str]:
        return frozenset().union(*self.states)

    @property
    def is_full(self) -> bool:
        return self.covered == self.taxa.as_set

    @property
    def num_states(self) -> int:
        return sum(1 for s in self.states if s)

    def state_of(self, x: str) -> int | None:
        for k, s in enumerate(self.states):
            if x in s:
                return k
        return None

    @cached_property
    def informative_masks(self) -> tuple[int, ...]:
        """Bitmasks of the states with two or more taxa."""
        return tuple(self.taxa.mask(s) for s in self.states if len(s) >= 2)

    def token(self, x: str, gap: str = "?") -> str:
        k = self.state_of(x)
        if k is None:
            return gap
        return self.symbols[k] if self.symbols is not None else str(k)

    def renamed(self, name: str) -> "Character":
        return Character(self.taxa, self.states, name, self.symbols)

    def __str__(self):
        blocks = ["".join(self.taxa.sort(s)) for s in self.states]
        return "|".join(blocks) if blocks else "<empty>"


def normalize(chi: Character) -> Character:
    """Drop empty states and order states by their first taxon."""
    seen: set[str] = set()
    for s in chi.states:
        if seen & s:
            raise MalformedCharacterError(
                f"character {chi.name!r} has overlapping states {sorted(seen & s)}"
            )
        seen |= s
    idx = chi.taxa.index
    pairs = [(s, k) for k, s in enumerate(chi.states) if s]
    pairs.sort(key=lambda p: min(idx[x] for x in p[0]))
    symbols = None
    if chi.symbols is not None:
        symbols = tuple(chi.symbols[k] for _, k in pairs)
    return Character(chi.taxa, tuple(s for s, _ in pairs), chi.name, symbols)


def restrict_character(chi: Character, taxa: Iterable[str]) -> Character:
    """Intersect every state with ``taxa`` (the result is normalized)."""
    keep = frozenset(taxa)
    if not keep <= chi.taxa.as_set:
        raise DomainError(f"restriction set has unknown taxa {sorted(keep - chi.taxa.as_set)}")
    return normalize(Character(chi.taxa, tuple(s & keep for s in chi.states), chi.name,
                               chi.symbols))


@dataclass(frozen=True)
class CharacterMatrix:
    taxa: TaxonSet
    characters: tuple[Character, ...] = ()

    def __post_init__(self):
        chars = tuple(self.characters)
        object.__setattr__(self, "characters", chars)
        for c in chars:
            if c.taxa.as_set != self.taxa.as_set:
                raise DomainError(f"character {c.name!r} is over a different taxon set")

    def __len__(self):
        return len(self.characters)

    def __iter__(self) -> Iterator[Character]:
        return iter(self.characters)

    def __getitem__(self, k):
        if isinstance(k, str):
            for c in self.characters:
                if c.name == k:
                    return c
            raise KeyError(k)
        return self.characters[k]

    @property
    def names(self) -> list[str]:
        return [c.name if c.name is not None else f"c{k + 1}"
                for k, c in enumerate(self.characters)]

    def subset(self, indices: Iterable[int]) -> "CharacterMatrix":
        return CharacterMatrix(self.taxa, tuple(self.characters[k] for k in sorted(indices)))

    def without(self, *names: str) -> "CharacterMatrix":
        missing = set(names) - set(self.names)
        if missing:
            raise KeyError(sorted(missing))
        return CharacterMatrix(self.taxa, tuple(
            c for c, nm in zip(self.characters, self.names) if nm not in names))

    def index_of(self, name: str) -> int:
        return self.names.index(name)


class Tree:
    """An unrooted tree whose labelled vertices are its leaves.

    ``edges`` are vertex pairs, ``leaf_label`` maps the labelled vertices
    to taxa. Internal vertices may have any degree, including 2.
    """

    def __init__(self, edges: Iterable[tuple], leaf_label: Mapping, taxa: TaxonSet | Sequence[str] | None = None,
                 vertices: Iterable | None = None):
        adj: dict = {}
        for v in vertices or ():
            adj.setdefault(v, [])
        for u, v in edges:
            if u == v:
                raise DomainError(f"self loop at {u!r}")
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        for v in leaf_label:
            adj.setdefault(v, [])
        self._adj = {v: tuple(ns) for v, ns in adj.items()}
        self._label = dict(leaf_label)
        self._vertex_of = {x: v for v, x in self._label.items()}
        if len(self._vertex_of) != len(self._label):
            raise DomainError("two vertices carry the same taxon")
        if taxa is None:
            taxa = TaxonSet(tuple(self._label.values()))
        elif not isinstance(taxa, TaxonSet):
            taxa = TaxonSet(tuple(taxa))
        if taxa.as_set != set(self._vertex_of):
            raise DomainError("leaf labels do not match the taxon set")
        self.taxa = taxa
        self._validate()

    def _validate(self):
        adj = self._adj
        if not adj:
            raise DomainError("empty tree")
        n_edges = sum(len(ns) for ns in adj.values()) // 2
        if n_edges != len(adj) - 1:
            raise DomainError("tree must be connected and acyclic")
        for v, ns in adj.items():
            if len(set(ns)) != len(ns):
                raise DomainError(f"parallel edges at {v!r}")
        start = next(iter(adj))
        seen = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(adj):
            raise DomainError("tree must be connected")
        if len(self.taxa) > 2:
            for v, x in self._label.items():
                if len(adj[v]) != 1:
                    raise DomainError(f"taxon {x!r} does not label a leaf")
        for v, ns in adj.items():
            if len(ns) <= 1 and v not in self._label and len(adj) > 1:
                raise DomainError(f"unlabelled leaf {v!r}")

    # -- accessors -------------------------------------------------------

    @property
    def vertices(self) -> list:
        return list(self._adj)

    @property
    def edges(self) -> list[tuple]:
        out = []
        for u, ns in self._adj.items():
            for v in ns:
                if self._order(u) < self._order(v):
                    out.append((u, v))
        return out

    @cached_property
    def _vertex_rank(self) -> dict:
        return {v: k for k, v in enumerate(self._adj)}

    def _order(self, v) -> int:
        return self._vertex_rank[v]

    def neighbors(self, v) -> tuple:
        return self._adj[v]

    def degree(self, v) -> int:
        return len(self._adj[v])

    def label(self, v) -> str | None:
        return self._label.get(v)

    @property
    def leaf_label(self) -> dict:
        return dict(self._label)

    def vertex_of(self, x: str):
        try:
            return self._vertex_of[x]
        except KeyError:
            raise DomainError(f"taxon {x!r} is not in the tree") from None

    def is_internal(self, v) -> bool:
        return v not in self._label

    def __contains__(self, v) -> bool:
        return v in self._adj

    def __len__(self):
        return len(self._adj)

    def __repr__(self):
        return f"Tree({to_newick(self)!r})"

    # -- traversal -------------------------------------------------------

    def parents_from(self, root) -> dict:
        """Parent pointers of the tree rooted at ``root`` (root maps to None)."""
        parent = {root: None}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in self._adj[v]:
                if w not in parent:
                    parent[w] = v
                    queue.append(w)
        return parent

    def path(self, u, v) -> list:
        """Vertices on the path from ``u`` to ``v``, both ends included."""
        parent = self.parents_from(u)
        out = [v]
        while out[-1] != u:
            out.append(parent[out[-1]])
        out.reverse()
        return out

    def steiner_vertices(self, taxa: Iterable[str]) -> frozenset:
        """Vertex set of the minimal subtree spanning ``taxa``."""
        targets = {self.vertex_of(x) for x in taxa}
        if not targets:
            return frozenset()
        root = next(iter(targets))
        parent = self.parents_from(root)
        keep = {root}
        for t in targets:
            v = t
            while v not in keep:
                keep.add(v)
                v = parent[v]
        return frozenset(keep)

    def side(self, u, v) -> frozenset[str]:
        """Taxa on the ``v`` side of edge ``uv``."""
        seen = {u, v}
        stack = [v]
        out = set()
        while stack:
            w = stack.pop()
            if w in self._label:
                out.add(self._label[w])
            for z in self._adj[w]:
                if z not in seen:
                    seen.add(z)
                    stack.append(z)
        return frozenset(out)

    def suppressed(self) -> "Tree":
        """Copy with every unlabelled degree-2 vertex smoothed away."""
        adj = {v: list(ns) for v, ns in self._adj.items()}
        for v in list(adj):
            if v not in self._label and len(adj[v]) == 2:
                x, y = adj.pop(v)
                adj[x][adj[x].index(v)] = y
                adj[y][adj[y].index(v)] = x
        if len(adj) == len(self._adj):
            return self
        return Tree(_dedupe_edges(adj), self._label, self.taxa, vertices=adj)

    def splits(self) -> frozenset:
        return splits(self)

    def relabelled(self, mapping: Mapping[str, str]) -> "Tree":
        """Copy with taxa renamed (or permuted) according to ``mapping``."""
        labels = {v: mapping.get(x, x) for v, x in self._label.items()}
        taxa = TaxonSet(tuple(mapping.get(x, x) for x in self.taxa))
        return Tree(self.edges, labels, taxa, vertices=self._adj)


def _dedupe_edges(adj: Mapping) -> list[tuple]:
    seen = set()
    out = []
    for u, ns in adj.items():
        for w in ns:
            key = frozenset((u, w))
            if key not in seen:
                seen.add(key)
                out.append((u, w))
    return out


def restrict_tree(tree: Tree, taxa: Iterable[str], suppress: bool = False) -> Tree:
    """The minimal subtree ``T[X']`` spanning ``taxa``.

    Degree-2 vertices created by the restriction are kept unless
    ``suppress`` is set.
    """
    keep_taxa = frozenset(taxa)
    if not keep_taxa:
        raise DomainError("cannot restrict a tree to the empty set")
    unknown = keep_taxa - tree.taxa.as_set
    if unknown:
        raise DomainError(f"unknown taxa {sorted(unknown)}")
    verts = tree.steiner_vertices(keep_taxa)
    edges = [(u, v) for u, v in tree.edges if u in verts and v in verts]
    labels = {v: x for v, x in tree.leaf_label.items() if v in verts}
    out = Tree(edges, labels, tree.taxa.subset(keep_taxa), vertices=verts)
    return out.suppressed() if suppress else out


def splits(tree: Tree) -> frozenset:
    """Non-trivial splits of ``tree`` after degree-2 suppression.

    Each split is the side containing the first taxon in label order.
    """
    t = tree.suppressed()
    first = t.taxa.labels[0]
    out = set()
    for u, v in t.edges:
        if t.is_internal(u) and t.is_internal(v):
            side = t.side(u, v)
            if first not in side:
                side = t.taxa.as_set - side
            out.add(side)
    return frozenset(out)


def same_topology(t1: Tree, t2: Tree) -> bool:
    return t1.taxa.as_set == t2.taxa.as_set and splits(t1) == splits(t2)


# -- Newick ---------------------------------------------------------------

def to_newick(tree: Tree) -> str:
    """Deterministic Newick text with degree-2 vertices suppressed."""
    t = tree.suppressed()
    idx = t.taxa.index
    if len(t) == 1:
        return f"{_quote(t.taxa.labels[0])};"
    first = t.vertex_of(t.taxa.labels[0])
    root = t.neighbors(first)[0]
    if not t.is_internal(root):
        # two-taxon tree
        return f"({','.join(_quote(x) for x in t.taxa.labels)});"
    parent = t.parents_from(root)
    children: dict = {v: [] for v in parent}
    for v, p in parent.items():
        if p is not None:
            children[p].append(v)
    low: dict = {}
    order = list(parent)
    for v in reversed(order):
        if not t.is_internal(v):
            low[v] = idx[t.label(v)]
        else:
            low[v] = min(low[c] for c in children[v])

    def render(v) -> str:
        if not t.is_internal(v):
            return _quote(t.label(v))
        kids = sorted(children[v], key=low.__getitem__)
        return "(" + ",".join(render(c) for c in kids) + ")"

    return render(root) + ";"


_NEWICK_SPECIAL = set("(),:;[]' \t\n")


def _quote(name: str) -> str:
    if any(ch in _NEWICK_SPECIAL for ch in name):
        return "'" + name.replace("'", "''") + "'"
    return name


class NewickError(DomainError):
    pass


def parse_newick(text: str, taxa: TaxonSet | None = None) -> Tree:
    """Parse one Newick tree. Branch lengths and internal labels are ignored."""
    s = text.strip()
    pos = 0
    edges = []
    labels = {}
    counter = [0]

    def error(msg):
        raise NewickError(f"{msg} at column {pos + 1}")

    def skip_ws():
        nonlocal pos
        while pos < len(s):
            if s[pos].isspace():
                pos += 1
            elif s[pos] == "[":
                end = s.find("]", pos)
                if end < 0:
                    error("unterminated comment")
                pos = end + 1
            else:
                break

    def read_name() -> str:
        nonlocal pos
        skip_ws()
        if pos < len(s) and s[pos] == "'":
            pos += 1
            out = []
            while True:
                if pos >= len(s):
                    error("unterminated quoted label")
                if s[pos] == "'":
                    if pos + 1 < len(s) and s[pos + 1] == "'":
                        out.append("'")
                        pos += 2
                        continue
                    pos += 1
                    break
                out.append(s[pos])
                pos += 1
            return "".join(out)
        start = pos
        while pos < len(s) and s[pos] not in _NEWICK_SPECIAL:
            pos += 1
        return s[start:pos]

    def skip_length():
        nonlocal pos
        skip_ws()
        if pos < len(s) and s[pos] == ":":
            pos += 1
            skip_ws()
            start = pos
            while pos < len(s) and s[pos] not in "(),;[" and not s[pos].isspace():
                pos += 1
            try:
                float(s[start:pos])
            except ValueError:
                error(f"bad branch length {s[start:pos]!r}")

    def node():
        nonlocal pos
        skip_ws()
        if pos < len(s) and s[pos] == "(":
            pos += 1
            v = ("#", counter[0])
            counter[0] += 1
            while True:
                c = node()
                edges.append((v, c))
                skip_ws()
                if pos < len(s) and s[pos] == ",":
                    pos += 1
                    continue
                if pos < len(s) and s[pos] == ")":
                    pos += 1
                    break
                error("expected ',' or ')'")
            read_name()
            skip_length()
            return v
        name = read_name()
        if not name:
            error("empty leaf label")
        if name in labels.values():
            error(f"duplicate leaf label {name!r}")
        v = ("leaf", name)
        labels[v] = name
        skip_length()
        return v

    root = node()
    skip_ws()
    if pos >= len(s) or s[pos] != ";":
        error("expected ';'")
    pos += 1
    skip_ws()
    if pos != len(s):
        error("trailing text after ';'")
    if taxa is None:
        taxa = TaxonSet(tuple(labels.values()))
    tree = Tree(edges, labels, taxa, vertices=[root])
    return tree.suppressed()
