"""Belief propagation on k-SAT factor graphs at finite inverse temperature.

Messages live on directed edges: h (variable to clause) and u (clause to
variable), both half log-likelihood ratios oriented as "the variable
satisfies the clause".  One synchronous step maps old messages to new
ones; iteration from the all-zero state for as many steps as the graph
diameter makes the messages exact on tree factor graphs.

The clause kernel is

    kernel(x_1..x_{k-1}) = -(1/2) log{1 - (1-e^-beta) 2^-(k-1)
                                      prod_i (1 - tanh x_i)},

nonnegative, bounded by beta/2, and decreasing in each argument.  Every u
message therefore stays in [0, beta/2].

Messages are stored in flat (M, k) arrays indexed by (clause, slot); the
update order is fixed by this indexing, so runs are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters
from .formula import FactorGraph

__all__ = [
    "BPParams",
    "MessageSet",
    "clause_kernel",
    "kernel_rows",
    "bp_step",
    "run_bp",
    "clause_energy_bp",
    "total_energy_bp",
    "marginal_bp",
]


@dataclass(frozen=True)
class BPParams:
    """Inverse temperature, iteration count, and initial h value."""

    beta: float
    t_max: int
    init: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise InvalidParameters(f"beta must be finite and >= 0, got {self.beta}")
        if self.t_max < 0:
            raise InvalidParameters(f"t_max must be >= 0, got {self.t_max}")
        if not math.isfinite(self.init):
            raise InvalidParameters("init must be finite")


@dataclass
class MessageSet:
    """Messages on all directed edges of a factor graph.

    ``h[a, i]`` is the message from the i-th variable of clause a to a;
    ``u[a, i]`` the message from a back to that variable.  The two arrays
    are kept mutually consistent by the engine: u = kernel(h).
    """

    graph: FactorGraph
    h: np.ndarray
    u: np.ndarray

    def h_message(self, var: int, clause: int) -> float:
        return float(self.h[clause, self._slot(var, clause)])

    def u_message(self, clause: int, var: int) -> float:
        return float(self.u[clause, self._slot(var, clause)])

    def _slot(self, var: int, clause: int) -> int:
        row = self.graph.clause_vars[clause]
        hits = np.flatnonzero(row == var)
        if hits.size != 1:
            raise InvalidParameters(f"variable {var} not on clause {clause}")
        return int(hits[0])


def kernel_rows(args: np.ndarray, beta: float) -> np.ndarray:
    """Clause kernel applied along the last axis of ``args``.

    Rows may contain +-inf (fully conditioned inputs); tanh saturates
    exactly, so the output stays finite in [0, beta/2].
    """
    args = np.asarray(args, dtype=np.float64)
    width = args.shape[-1]
    c = -math.expm1(-beta)  # 1 - e^-beta
    prod = np.prod(1.0 - np.tanh(args), axis=-1)
    # floating rounding cannot push the product above 2^width, but clamp
    # anyway so u <= beta/2 holds exactly
    inner = np.minimum((c / 2.0**width) * prod, c)
    return -0.5 * np.log1p(-inner)


def clause_kernel(args, beta: float, k: int | None = None) -> float:
    """Clause kernel on k-1 real arguments.  Total for finite beta >= 0."""
    if not (math.isfinite(beta) and beta >= 0):
        raise InvalidParameters(f"beta must be finite and >= 0, got {beta}")
    arr = np.asarray(args, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidParameters("args must be a flat sequence")
    if k is not None and arr.size != k - 1:
        raise InvalidParameters(f"expected {k - 1} arguments, got {arr.size}")
    return float(kernel_rows(arr, beta))


def _kernel_except_self(h: np.ndarray, beta: float) -> np.ndarray:
    """u[a, i] = kernel over the other k-1 slots of clause a.

    Uses prefix/suffix products so saturated tanh (t = 0 exactly) never
    forces a division.
    """
    m, k = h.shape
    c = -math.expm1(-beta)
    t = 1.0 - np.tanh(h)
    left = np.ones_like(t)
    right = np.ones_like(t)
    for i in range(1, k):
        left[:, i] = left[:, i - 1] * t[:, i - 1]
        right[:, k - 1 - i] = right[:, k - i] * t[:, k - i]
    prod_except = left * right
    inner = np.minimum((c / 2.0 ** (k - 1)) * prod_except, c)
    return -0.5 * np.log1p(-inner)


def _aggregate_h(g: FactorGraph, u: np.ndarray) -> np.ndarray:
    """h[a, i] = sum of same-sign u into var minus opposite-sign, excluding a.

    With q = +-1 the literal sign, h_{i->a} = q_{ai} * S_i - u_{a->i},
    where S_i is the sign-weighted sum of all u messages into i.
    """
    q = g.edge_sign
    s = np.bincount(
        g.clause_vars.ravel(), weights=(q * u).ravel(), minlength=g.num_vars
    )
    return q * s[g.clause_vars] - u


def _empty_messages(g: FactorGraph, p: BPParams) -> MessageSet:
    h = np.full((g.num_clauses, g.k if g.num_clauses else 0), p.init)
    u = _kernel_except_self(h, p.beta) if g.num_clauses else h.copy()
    return MessageSet(graph=g, h=h, u=u)


def bp_step(g: FactorGraph, msgs: MessageSet, p: BPParams) -> MessageSet:
    """One synchronous update: new h from old u, then new u from new h."""
    if g.num_clauses == 0:
        return MessageSet(graph=g, h=msgs.h.copy(), u=msgs.u.copy())
    h_new = _aggregate_h(g, msgs.u)
    u_new = _kernel_except_self(h_new, p.beta)
    return MessageSet(graph=g, h=h_new, u=u_new)


def run_bp(g: FactorGraph, p: BPParams) -> MessageSet:
    """t_max synchronous steps from the uniform initial condition."""
    msgs = _empty_messages(g, p)
    for _ in range(p.t_max):
        msgs = bp_step(g, msgs, p)
    return msgs


def _violation_given_h(h_rows: np.ndarray, beta: float) -> np.ndarray:
    """Clause violation probability given incoming h messages.

    Closed form of the reweighted sum over the 2^k local assignments:
    e^-beta P / (1 - (1 - e^-beta) P) with P = prod_i (1 - tanh h_i)/2.
    """
    prod = np.prod(0.5 * (1.0 - np.tanh(h_rows)), axis=-1)
    c = -math.expm1(-beta)
    return math.exp(-beta) * prod / (1.0 - np.minimum(c * prod, c))


def clause_energy_bp(a: int, msgs: MessageSet, p: BPParams) -> float:
    """BP estimate of the probability that clause ``a`` is violated."""
    if not 0 <= a < msgs.graph.num_clauses:
        raise InvalidParameters(f"clause {a} out of range")
    return float(_violation_given_h(msgs.h[a], p.beta))


def total_energy_bp(g: FactorGraph, msgs: MessageSet, p: BPParams) -> float:
    """BP estimate of the expected number of violated clauses."""
    if g.num_clauses == 0:
        return 0.0
    return float(_violation_given_h(msgs.h, p.beta).sum())


def marginal_bp(i: int, msgs: MessageSet) -> float:
    """BP belief P(x_i = 1) from the incoming u messages."""
    g = msgs.graph
    if not 0 <= i < g.num_vars:
        raise InvalidParameters(f"variable {i} out of range")
    field = 0.0
    for clause, negated in g.var_to_clauses[i]:
        u = msgs.u_message(clause, i)
        field += -u if negated else u
    return 0.5 * (1.0 + math.tanh(field))
