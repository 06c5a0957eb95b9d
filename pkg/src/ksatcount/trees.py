"""Random tree k-SAT ensembles and worst-case-boundary correlation decay.

The depth-r tree ensemble grows from a root variable: every variable at
generation < r spawns Poisson(k*alpha) clauses, each clause attaching
k-1 fresh child variables, with every literal sign an independent fair
coin.  Conditioning the assignment of the generation-r variables pins
their half log-likelihood messages to +-inf; propagating the interval
[min, max] over all boundary conditions through the clause kernel (which
is monotone decreasing in each argument) yields exact worst-case message
intervals on every edge, because disjoint subtrees can be conditioned
independently.

The interval width at the root edge of a degree-one root contracts in
expectation by the factor

    contraction_rate(k, alpha) = k (k-1) alpha (1 - e^{-k alpha/2}/4)
                                 * (1 - e^{-k alpha/2}/2)^{k-2}

per extra generation of subtree depth; its unit root contraction_threshold(k)
lower-bounds the decay threshold.  At infinite inverse temperature the
scalar recursion rho_{r+1} = (1 - exp(-k alpha rho_r / 2))^{k-1} from
rho_0 = 1 (the probability that some boundary forces the root literal)
vanishes iff alpha is below forcing_threshold(k), the matching upper
bound instrument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .bp import kernel_rows
from .errors import InvalidParameters
from .formula import Clause, Formula, Literal
from .rng import as_generator, substream

__all__ = [
    "TreeFormula",
    "MessageInterval",
    "DecayStats",
    "ForcingThreshold",
    "sample_tree",
    "tree_to_formula",
    "propagate_intervals",
    "clause_intervals_at_root",
    "decay_experiment",
    "contraction_rate",
    "contraction_threshold",
    "forcing_recursion",
    "forcing_threshold",
]


@dataclass
class TreeFormula:
    """Arena-stored random tree formula of depth ``depth``.

    Variable 0 is the root.  ``var_generation[v]`` is v's distance from
    the root; ``clause_owner[c]`` is the variable that spawned clause c
    (the clause's parent-side literal), ``clause_children[c]`` its k-1
    fresh child variables.  Negation flags follow the same layout.
    """

    k: int
    alpha: float
    depth: int
    var_generation: np.ndarray
    var_parent_neg: np.ndarray  # sign of v's literal in its parent clause
    clause_owner: np.ndarray
    clause_owner_neg: np.ndarray
    clause_children: np.ndarray  # (C, k-1)
    clause_child_negs: np.ndarray  # (C, k-1)

    @property
    def num_vars(self) -> int:
        return self.var_generation.size

    @property
    def num_clauses(self) -> int:
        return self.clause_owner.size

    def root_clauses(self) -> np.ndarray:
        return np.flatnonzero(self.clause_owner == 0)


@dataclass(frozen=True)
class MessageInterval:
    """Worst-case-boundary range [lo, hi] of a clause-to-variable message."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.lo <= self.hi:
            raise InvalidParameters(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class DecayStats:
    """Monte-Carlo estimate of E tanh(width) at one subtree depth."""

    depth: int
    samples: int
    mean_tanh_delta: float
    stderr: float


def sample_tree(
    k: int,
    alpha: float,
    depth: int,
    seed: int | np.random.Generator,
    *,
    root_degree_one: bool = False,
) -> TreeFormula:
    """Sample a depth-``depth`` tree formula.

    Every variable at generation < depth spawns Poisson(k*alpha) clauses;
    ``root_degree_one`` pins the root's clause count to exactly one (the
    clause count is independent of the rest of the structure, so this is
    sampling from the conditional law).
    """
    if k < 2:
        raise InvalidParameters(f"k must be >= 2, got {k}")
    if alpha < 0 or not math.isfinite(alpha):
        raise InvalidParameters(f"alpha must be finite and >= 0, got {alpha}")
    if depth < 0:
        raise InvalidParameters(f"depth must be >= 0, got {depth}")
    if root_degree_one and depth < 1:
        raise InvalidParameters("root_degree_one needs depth >= 1")
    rng = as_generator(seed)

    var_gen = [0]
    var_parent_neg: list[bool] = [False]
    owners: list[np.ndarray] = []
    owner_negs: list[np.ndarray] = []
    children: list[np.ndarray] = []
    child_negs: list[np.ndarray] = []

    level = np.array([0], dtype=np.int64)
    next_var = 1
    for g in range(depth):
        if level.size == 0:
            break
        counts = rng.poisson(k * alpha, level.size)
        if g == 0 and root_degree_one:
            counts = np.array([1], dtype=np.int64)
        nc = int(counts.sum())
        if nc == 0:
            level = np.array([], dtype=np.int64)
            continue
        own = np.repeat(level, counts)
        oneg = rng.integers(0, 2, nc).astype(bool)
        cneg = rng.integers(0, 2, (nc, k - 1)).astype(bool)
        ch = np.arange(next_var, next_var + nc * (k - 1), dtype=np.int64).reshape(
            nc, k - 1
        )
        next_var += nc * (k - 1)
        owners.append(own)
        owner_negs.append(oneg)
        children.append(ch)
        child_negs.append(cneg)
        var_gen.extend([g + 1] * (nc * (k - 1)))
        var_parent_neg.extend(cneg.ravel().tolist())
        level = ch.ravel()

    if owners:
        clause_owner = np.concatenate(owners)
        clause_owner_neg = np.concatenate(owner_negs)
        clause_children = np.concatenate(children, axis=0)
        clause_child_negs = np.concatenate(child_negs, axis=0)
    else:
        clause_owner = np.array([], dtype=np.int64)
        clause_owner_neg = np.array([], dtype=bool)
        clause_children = np.zeros((0, k - 1), dtype=np.int64)
        clause_child_negs = np.zeros((0, k - 1), dtype=bool)
    return TreeFormula(
        k=k,
        alpha=alpha,
        depth=depth,
        var_generation=np.array(var_gen, dtype=np.int64),
        var_parent_neg=np.array(var_parent_neg, dtype=bool),
        clause_owner=clause_owner,
        clause_owner_neg=clause_owner_neg,
        clause_children=clause_children,
        clause_child_negs=clause_child_negs,
    )


def tree_to_formula(t: TreeFormula) -> Formula:
    """Flatten a tree into an ordinary Formula (same variable numbering)."""
    clauses = []
    for c in range(t.num_clauses):
        lits = [Literal(int(t.clause_owner[c]), bool(t.clause_owner_neg[c]))]
        lits += [
            Literal(int(v), bool(s))
            for v, s in zip(t.clause_children[c], t.clause_child_negs[c])
        ]
        clauses.append(Clause(tuple(lits)))
    return Formula(num_vars=t.num_vars, k=t.k if clauses else 0, clauses=tuple(clauses))


def _propagate(t: TreeFormula, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Interval bounds (u_lo, u_hi) for every clause-to-owner message.

    Boundary variables (generation == depth) carry h in [-inf, +inf];
    tanh saturates exactly, so their clauses get [0, beta/2].  Internal
    recursion: the upper u comes from the lower child h's and vice versa,
    by monotonicity of the kernel.  Equality with the true boundary
    max/min holds on trees because sibling subtrees are disjoint.
    """
    if not (math.isfinite(beta) and beta >= 0):
        raise InvalidParameters(
            f"interval propagation needs finite beta >= 0, got {beta}"
        )
    n, c = t.num_vars, t.num_clauses
    h_lo = np.zeros(n)
    h_hi = np.zeros(n)
    boundary = t.var_generation == t.depth
    h_lo[boundary] = -np.inf
    h_hi[boundary] = np.inf
    u_lo = np.zeros(c)
    u_hi = np.zeros(c)
    owner_gen = t.var_generation[t.clause_owner] if c else np.array([], dtype=np.int64)
    for g in range(t.depth - 1, -1, -1):
        cls = np.flatnonzero(owner_gen == g)
        if cls.size == 0:
            continue
        u_hi[cls] = kernel_rows(h_lo[t.clause_children[cls]], beta)
        u_lo[cls] = kernel_rows(h_hi[t.clause_children[cls]], beta)
        # fold these clauses into their owners' h intervals for level g-1
        own = t.clause_owner[cls]
        agree = t.clause_owner_neg[cls] == t.var_parent_neg[own]
        pos, neg = cls[agree], cls[~agree]
        lo = np.bincount(t.clause_owner[pos], weights=u_lo[pos], minlength=n)
        lo -= np.bincount(t.clause_owner[neg], weights=u_hi[neg], minlength=n)
        hi = np.bincount(t.clause_owner[pos], weights=u_hi[pos], minlength=n)
        hi -= np.bincount(t.clause_owner[neg], weights=u_lo[neg], minlength=n)
        at_g = t.var_generation == g
        h_lo[at_g] = lo[at_g]
        h_hi[at_g] = hi[at_g]
    return u_lo, u_hi


def propagate_intervals(t: TreeFormula, beta: float) -> MessageInterval:
    """Worst-case message interval on the root edge of a degree-one root."""
    roots = t.root_clauses()
    if roots.size != 1:
        raise InvalidParameters(
            f"root must own exactly one clause, it owns {roots.size}"
        )
    u_lo, u_hi = _propagate(t, beta)
    a = int(roots[0])
    return MessageInterval(lo=float(u_lo[a]), hi=float(u_hi[a]))


def clause_intervals_at_root(t: TreeFormula, beta: float) -> list[MessageInterval]:
    """Message intervals for every clause attached to the root."""
    u_lo, u_hi = _propagate(t, beta)
    return [
        MessageInterval(lo=float(u_lo[a]), hi=float(u_hi[a]))
        for a in t.root_clauses()
    ]


def _sample_root_widths(
    k: int, alpha: float, beta: float, depth: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """n i.i.d. root-edge interval widths for subtree depth ``depth``.

    Level-synchronous sampling of the same recursion ``_propagate`` runs
    on explicit trees: the root clause has k-1 children, each carrying an
    independent depth-``depth`` subtree with conditioned leaves.  Only the
    relative literal signs matter, and they are i.i.d. fair coins.
    """
    if depth == 0:
        return np.full(n, beta / 2.0)
    nv = [0] * (depth + 1)
    nv[1] = n * (k - 1)
    counts: list[np.ndarray | None] = [None] * (depth + 1)
    agree: list[np.ndarray | None] = [None] * (depth + 1)
    for lvl in range(1, depth + 1):
        counts[lvl] = rng.poisson(k * alpha, nv[lvl])
        nc = int(counts[lvl].sum())
        agree[lvl] = rng.integers(0, 2, nc).astype(bool)
        if lvl < depth:
            nv[lvl + 1] = nc * (k - 1)
    h_lo = h_hi = None
    for lvl in range(depth, 0, -1):
        nc = int(counts[lvl].sum())
        if lvl == depth:
            u_lo = np.zeros(nc)
            u_hi = np.full(nc, beta / 2.0)
        else:
            u_hi = kernel_rows(h_lo.reshape(nc, k - 1), beta)
            u_lo = kernel_rows(h_hi.reshape(nc, k - 1), beta)
        own = np.repeat(np.arange(nv[lvl]), counts[lvl])
        s = agree[lvl]
        h_lo = np.bincount(own[s], weights=u_lo[s], minlength=nv[lvl]) - np.bincount(
            own[~s], weights=u_hi[~s], minlength=nv[lvl]
        )
        h_hi = np.bincount(own[s], weights=u_hi[s], minlength=nv[lvl]) - np.bincount(
            own[~s], weights=u_lo[~s], minlength=nv[lvl]
        )
    root_hi = kernel_rows(h_lo.reshape(n, k - 1), beta)
    root_lo = kernel_rows(h_hi.reshape(n, k - 1), beta)
    return root_hi - root_lo


def decay_experiment(
    k: int,
    alpha: float,
    beta: float,
    depth: int,
    n_samples: int,
    seed: int,
) -> list[DecayStats]:
    """Monte-Carlo decay of the root-edge interval width by subtree depth.

    For each d in 0..depth, samples ``n_samples`` trees whose root owns a
    single clause with k-1 children carrying independent depth-d
    subtrees (boundary conditioning d+1 generations below the root) and
    reports mean and standard error of tanh(interval width).  Each depth
    uses its own derived RNG stream, so the per-depth results do not
    depend on evaluation order.
    """
    if n_samples < 1:
        raise InvalidParameters("n_samples must be >= 1")
    if not (math.isfinite(beta) and beta >= 0):
        raise InvalidParameters(f"beta must be finite and >= 0, got {beta}")
    if depth < 0:
        raise InvalidParameters("depth must be >= 0")
    out = []
    for d in range(depth + 1):
        rng = substream(seed, d)
        tanh_w = np.tanh(_sample_root_widths(k, alpha, beta, d, n_samples, rng))
        mean = float(tanh_w.mean())
        se = float(tanh_w.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
        out.append(
            DecayStats(depth=d, samples=n_samples, mean_tanh_delta=mean, stderr=se)
        )
    return out


def contraction_rate(k: int, alpha) -> float | np.ndarray:
    """Per-generation contraction factor of the expected tanh interval width."""
    if k < 2:
        raise InvalidParameters(f"k must be >= 2, got {k}")
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(a < 0):
        raise InvalidParameters("alpha must be >= 0")
    e = np.exp(-k * a / 2.0)
    val = k * (k - 1) * a * (1.0 - 0.25 * e) * (1.0 - 0.5 * e) ** (k - 2)
    return float(val) if np.isscalar(alpha) else val


def contraction_threshold(k: int) -> float:
    """Smallest positive clause density where the contraction factor hits 1.

    Scans upward from 0 for the first sign change, then polishes the
    bracket with Brent's method to 1e-10.
    """
    if k < 2:
        raise InvalidParameters(f"k must be >= 2, got {k}")
    step = max(0.05 * 2.0 * math.log(k) / k, 1e-4)
    lo = 0.0
    hi = step
    while contraction_rate(k, hi) < 1.0:
        lo = hi
        hi += step
        if hi > 1e6:  # unreachable: the rate grows linearly in alpha
            raise RuntimeError("no root found")
    return float(brentq(lambda a: contraction_rate(k, a) - 1.0, lo, hi, xtol=1e-10))


def forcing_recursion(k: int, alpha: float, depth: int) -> np.ndarray:
    """Sequence rho_0..rho_depth of root-forcing probabilities at beta=inf.

    rho_0 = 1 and rho_{r+1} = (1 - exp(-k alpha rho_r / 2))^{k-1}; values
    stay in [0, 1] and the sequence is monotone nonincreasing.
    """
    if k < 2:
        raise InvalidParameters(f"k must be >= 2, got {k}")
    if alpha < 0 or not math.isfinite(alpha):
        raise InvalidParameters(f"alpha must be finite and >= 0, got {alpha}")
    if depth < 0:
        raise InvalidParameters("depth must be >= 0")
    out = np.empty(depth + 1)
    rho = 1.0
    out[0] = rho
    for r in range(1, depth + 1):
        rho = (-math.expm1(-k * alpha * rho / 2.0)) ** (k - 1)
        out[r] = rho
    return out


@dataclass(frozen=True)
class ForcingThreshold:
    """Bisection result: vanishing-forcing threshold with its bracket."""

    alpha: float
    bracket_lo: float
    bracket_hi: float
    depth: int
    tol: float


def forcing_threshold(
    k: int, *, depth: int = 200, tol: float = 1e-8, xtol: float = 1e-6
) -> ForcingThreshold:
    """Largest clause density whose forcing recursion still vanishes.

    The predicate "rho_depth < tol" is monotone in alpha; bisection to
    ``xtol`` reports the bracketing interval.  This upper-bounds the
    decay threshold, complementing ``contraction_threshold`` from below.
    """
    if k < 2:
        raise InvalidParameters(f"k must be >= 2, got {k}")

    def vanishes(a: float) -> bool:
        return forcing_recursion(k, a, depth)[-1] < tol

    lo = 0.0
    hi = max(4.0 * math.log(k) / k, 1.0)
    while vanishes(hi):
        lo = hi
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("no threshold found")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if vanishes(mid):
            lo = mid
        else:
            hi = mid
    return ForcingThreshold(
        alpha=0.5 * (lo + hi), bracket_lo=lo, bracket_hi=hi, depth=depth, tol=tol
    )
