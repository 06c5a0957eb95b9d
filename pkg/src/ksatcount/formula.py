"""Random k-SAT formulas: generation, energy, factor graphs, DIMACS I/O.

A formula is a conjunction of M clauses over N boolean variables, every
clause a disjunction of exactly k literals on pairwise-distinct variables.
The energy of an assignment is the number of clauses it violates.

Random instances draw each clause independently and uniformly from the
2^k * C(N, k) possible width-k clauses: a uniform k-subset of variables
plus an independent fair sign per literal.  Repeated clauses across the
formula are allowed (i.i.d. sampling); repeated variables within a clause
are not.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimacsParseError,
    InvalidAssignment,
    InvalidParameters,
    UnsupportedFormula,
)
from .rng import as_generator

__all__ = [
    "Literal",
    "Clause",
    "Formula",
    "FactorGraph",
    "generate_random",
    "energy",
    "build_factor_graph",
    "diameter",
    "parse_dimacs",
    "write_dimacs",
    "generation_comment",
    "read_generation_comment",
    "clause_arrays",
]


@dataclass(frozen=True)
class Literal:
    """A possibly negated variable occurrence.  Variables are 0-indexed."""

    var: int
    negated: bool

    def __str__(self) -> str:
        return f"{'-' if self.negated else ''}x{self.var}"


@dataclass(frozen=True)
class Clause:
    """A disjunction of k literals over pairwise-distinct variables."""

    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        vs = [lit.var for lit in self.literals]
        if len(set(vs)) != len(vs):
            raise InvalidParameters(f"clause repeats a variable: {vs}")

    @property
    def width(self) -> int:
        return len(self.literals)


@dataclass(frozen=True)
class Formula:
    """An immutable width-k CNF formula over ``num_vars`` variables.

    ``k`` is 0 only for the empty formula (no clauses).
    """

    num_vars: int
    k: int
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        if self.num_vars < 0:
            raise InvalidParameters("num_vars must be nonnegative")
        if self.clauses:
            if self.k < 1:
                raise InvalidParameters("k must be >= 1 for a nonempty formula")
            for c in self.clauses:
                if c.width != self.k:
                    raise UnsupportedFormula(
                        f"clause width {c.width} differs from k={self.k}"
                    )
                for lit in c.literals:
                    if not 0 <= lit.var < self.num_vars:
                        raise InvalidParameters(f"variable {lit.var} out of range")
        elif self.k < 0:
            raise InvalidParameters("k must be nonnegative")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def alpha(self) -> float:
        """Clause density M/N."""
        return self.num_clauses / self.num_vars if self.num_vars else 0.0


def clause_arrays(f: Formula) -> tuple[np.ndarray, np.ndarray]:
    """Flat (M, k) arrays of variable indices and negation flags."""
    m = f.num_clauses
    k = f.k if m else 0
    cv = np.empty((m, k), dtype=np.int64)
    cn = np.empty((m, k), dtype=bool)
    for j, c in enumerate(f.clauses):
        for i, lit in enumerate(c.literals):
            cv[j, i] = lit.var
            cn[j, i] = lit.negated
    return cv, cn


def generate_random(
    n: int, m: int, k: int, seed: int | np.random.Generator
) -> Formula:
    """Draw m i.i.d. uniform k-clauses over n variables.

    Deterministic given the seed.  Raises InvalidParameters for k < 2,
    n < k, or m < 0.
    """
    if k < 2:
        raise InvalidParameters(f"k must be >= 2, got {k}")
    if n < k:
        raise InvalidParameters(f"need n >= k, got n={n}, k={k}")
    if m < 0:
        raise InvalidParameters(f"m must be >= 0, got {m}")
    rng = as_generator(seed)
    if m == 0:
        return Formula(num_vars=n, k=k, clauses=())
    # k smallest of n i.i.d. uniform keys per row = uniform k-subset
    keys = rng.random((m, n))
    chosen = np.argpartition(keys, k - 1, axis=1)[:, :k]
    chosen.sort(axis=1)
    negs = rng.integers(0, 2, size=(m, k), dtype=np.int64).astype(bool)
    clauses = tuple(
        Clause(tuple(Literal(int(v), bool(s)) for v, s in zip(row, srow)))
        for row, srow in zip(chosen, negs)
    )
    return Formula(num_vars=n, k=k, clauses=clauses)


def energy(f: Formula, x) -> int:
    """Number of clauses violated by assignment x (length-N 0/1 vector)."""
    vals = np.asarray(x)
    if vals.shape != (f.num_vars,):
        raise InvalidAssignment(
            f"assignment has shape {vals.shape}, expected ({f.num_vars},)"
        )
    if vals.dtype != bool:
        if not np.isin(vals, (0, 1)).all():
            raise InvalidAssignment("assignment values must be 0/1 or bool")
        vals = vals.astype(bool)
    if not f.clauses:
        return 0
    cv, cn = clause_arrays(f)
    # a clause is violated iff every literal is false: x[var] == negated
    return int(np.all(vals[cv] == cn, axis=1).sum())


class FactorGraph:
    """Bipartite adjacency of a formula: variable nodes vs clause nodes.

    Immutable after construction; safe to share across concurrent readers.
    ``clause_vars``/``clause_negs`` are (M, k) arrays; ``var_to_clauses``
    mirrors them as per-variable lists of (clause index, negated) pairs.
    """

    def __init__(self, f: Formula):
        self.num_vars = f.num_vars
        self.num_clauses = f.num_clauses
        self.k = f.k
        cv, cn = clause_arrays(f)
        self.clause_vars = cv
        self.clause_negs = cn
        # +1 where the literal is direct, -1 where negated
        self.edge_sign = np.where(cn, -1.0, 1.0)
        var_to: list[list[tuple[int, bool]]] = [[] for _ in range(f.num_vars)]
        for j in range(f.num_clauses):
            for i in range(self.k):
                var_to[cv[j, i]].append((j, bool(cn[j, i])))
        self.var_to_clauses = tuple(tuple(adj) for adj in var_to)
        for arr in (self.clause_vars, self.clause_negs, self.edge_sign):
            arr.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return self.num_clauses * self.k

    def var_degree(self, i: int) -> int:
        return len(self.var_to_clauses[i])


def build_factor_graph(f: Formula) -> FactorGraph:
    """Construct the factor graph of a formula."""
    return FactorGraph(f)


def diameter(g: FactorGraph) -> int:
    """Largest variable eccentricity, maximized over connected components.

    Distance between two variables sharing a clause is 1.  A graph with
    only isolated variables has diameter 0.
    """
    n = g.num_vars
    if n == 0:
        return 0
    # variable -> neighbouring variables through shared clauses
    neigh: list[set[int]] = [set() for _ in range(n)]
    for j in range(g.num_clauses):
        row = g.clause_vars[j]
        for a in row:
            for b in row:
                if a != b:
                    neigh[a].add(int(b))
    best = 0
    dist = np.empty(n, dtype=np.int64)
    for src in range(n):
        if not neigh[src]:
            continue
        dist.fill(-1)
        dist[src] = 0
        frontier = [src]
        ecc = 0
        while frontier:
            nxt = []
            for v in frontier:
                for w in neigh[v]:
                    if dist[w] < 0:
                        dist[w] = dist[v] + 1
                        ecc = max(ecc, int(dist[w]))
                        nxt.append(w)
            frontier = nxt
        best = max(best, ecc)
    return best


_GEN_COMMENT_RE = re.compile(
    r"^c\s+ksat-count\s+k=(\d+)\s+alpha=(\S+)\s+seed=(\d+)\s*$", re.MULTILINE
)


def generation_comment(k: int, alpha: float, seed: int) -> str:
    """Provenance comment embedded in generated DIMACS files."""
    return f"ksat-count k={k} alpha={format(float(alpha), '.17g')} seed={seed}"


def read_generation_comment(text: str) -> dict | None:
    """Extract (k, alpha, seed) from a generated file's comment, if present."""
    m = _GEN_COMMENT_RE.search(text)
    if m is None:
        return None
    return {"k": int(m.group(1)), "alpha": float(m.group(2)), "seed": int(m.group(3))}


def parse_dimacs(text: str | bytes) -> Formula:
    """Parse a DIMACS CNF file with uniform clause width.

    Mixed clause widths raise UnsupportedFormula; malformed headers and
    inconsistent counts raise DimacsParseError.  Comments are ignored,
    except that a ``ksat-count`` provenance comment supplies k for an
    empty formula.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header = None
    tokens: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise DimacsParseError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsParseError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsParseError(f"line {lineno}: malformed header {line!r}")
            if header[0] < 0 or header[1] < 0:
                raise DimacsParseError(f"line {lineno}: negative header counts")
            continue
        if header is None:
            raise DimacsParseError(f"line {lineno}: clause data before header")
        for tok in line.split():
            try:
                tokens.append(int(tok))
            except ValueError:
                raise DimacsParseError(f"line {lineno}: bad token {tok!r}")
    if header is None:
        raise DimacsParseError("missing 'p cnf' header")
    n, m = header
    clauses: list[Clause] = []
    current: list[Literal] = []
    for tok in tokens:
        if tok == 0:
            clauses.append(Clause(tuple(current)))
            current = []
            continue
        v = abs(tok)
        if not 1 <= v <= n:
            raise DimacsParseError(f"variable {v} out of range 1..{n}")
        current.append(Literal(var=v - 1, negated=tok < 0))
    if current:
        raise DimacsParseError("unterminated clause at end of input")
    if len(clauses) != m:
        raise DimacsParseError(f"header declares {m} clauses, found {len(clauses)}")
    widths = {c.width for c in clauses}
    if len(widths) > 1:
        raise UnsupportedFormula(f"mixed clause widths {sorted(widths)}")
    if clauses:
        k = widths.pop()
    else:
        meta = read_generation_comment(text)
        k = meta["k"] if meta else 0
    try:
        return Formula(num_vars=n, k=k, clauses=tuple(clauses))
    except InvalidParameters as exc:
        raise UnsupportedFormula(str(exc)) from exc


def write_dimacs(f: Formula, comments: tuple[str, ...] | list[str] = ()) -> str:
    """Serialize a formula to canonical DIMACS CNF text."""
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.num_vars} {f.num_clauses}")
    for c in f.clauses:
        lits = " ".join(
            f"{'-' if lit.negated else ''}{lit.var + 1}" for lit in c.literals
        )
        lines.append(f"{lits} 0")
    return "\n".join(lines) + "\n"
