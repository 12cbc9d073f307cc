"""
Matrix and tree files.

A matrix file is tab-separated text. The header row is ``taxon`` followed
by the character names; every further row is a taxon id followed by one
state token per character. ``?`` marks a gap and ``-`` is read as a gap
too. Tree files hold one Newick tree per line.
"""
from __future__ import annotations

from typing import Iterable

from .core import (
    Character,
    CharacterMatrix,
    DomainError,
    TaxonSet,
    Tree,
    parse_newick,
    to_newick,
)

GAP = "?"
GAP_TOKENS = ("?", "-")


class MatrixFormatError(DomainError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + msg)
        self.line = line
        self.column = column


def parse_matrix(text: str) -> CharacterMatrix:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MatrixFormatError("empty matrix file", 1)
    header = lines[0].split("\t")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise MatrixFormatError("blank line inside the matrix", lineno)
        rows.append((lineno, line.split("\t")))
    width = len(rows[0][1]) if rows else len(header)
    if len(header) == width:
        names = header[1:]
    elif len(header) == width - 1:
        names = header
    else:
        raise MatrixFormatError(
            f"header has {len(header)} fields but rows have {width}", 1)
    if len(set(names)) != len(names):
        raise MatrixFormatError("duplicate character names in header", 1)
    for col, nm in enumerate(names, start=len(header) - len(names) + 1):
        if not nm:
            raise MatrixFormatError("empty character name", 1, col)
    taxa = []
    cells: dict[str, list[str]] = {}
    for lineno, fields in rows:
        if len(fields) != width:
            raise MatrixFormatError(
                f"expected {width} fields, found {len(fields)}", lineno, min(len(fields), width) + 1)
        x = fields[0]
        if not x:
            raise MatrixFormatError("empty taxon id", lineno, 1)
        if x in cells:
            raise MatrixFormatError(f"duplicate taxon id {x!r}", lineno, 1)
        for col, tok in enumerate(fields[1:], start=2):
            if not tok or tok != tok.strip():
                raise MatrixFormatError(f"bad state token {tok!r}", lineno, col)
        taxa.append(x)
        cells[x] = fields[1:]
    if not taxa:
        raise MatrixFormatError("matrix has no taxa", 2)
    taxon_set = TaxonSet(tuple(taxa))
    chars = []
    for k, nm in enumerate(names):
        column = {x: cells[x][k] for x in taxa}
        chars.append(Character.from_column(taxon_set, column, nm, GAP_TOKENS))
    return CharacterMatrix(taxon_set, tuple(chars))


def format_matrix(matrix: CharacterMatrix) -> str:
    names = matrix.names
    out = ["\t".join(["taxon", *names])]
    for x in matrix.taxa:
        out.append("\t".join([x, *(c.token(x, GAP) for c in matrix)]))
    return "\n".join(out) + "\n"


def read_matrix(path) -> CharacterMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def write_matrix(matrix: CharacterMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(matrix))


def parse_trees(text: str, taxa: TaxonSet | None = None) -> list[Tree]:
    trees = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            tree = parse_newick(line)
        except DomainError as err:
            raise DomainError(f"line {lineno}: {err}") from None
        if taxa is not None:
            if tree.taxa.as_set != taxa.as_set:
                return_diff = sorted(tree.taxa.as_set ^ taxa.as_set)
                raise DomainError(
                    f"line {lineno}: tree leaves and matrix taxa differ: {return_diff}")
            tree = Tree(tree.edges, tree.leaf_label, taxa, vertices=tree.vertices)
        trees.append(tree)
    return trees


def format_trees(trees: Iterable[Tree]) -> str:
    return "".join(to_newick(t) + "\n" for t in trees)
