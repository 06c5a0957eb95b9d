"""Exact brute-force ground truth by enumeration over all 2^N assignments.

Everything here is deliberately exhaustive: a single pass over the
assignment space yields the full energy histogram, from which the
partition function, Gibbs expectations, and near-satisfying counts at any
inverse temperature follow.  The hard cap keeps runtimes at desk scale.

Assignment i (an integer in [0, 2^N)) sets variable v to bit v of i.
``beta=math.inf`` is supported throughout and denotes the zero-energy
(satisfying-assignment) measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import InstanceTooLarge, InvalidParameters, UndefinedConditional
from .formula import Formula, clause_arrays

__all__ = [
    "HARD_CAP",
    "ExactSummary",
    "ExactGibbs",
    "enumerate_exact",
    "energy_histogram",
    "count_good",
    "count_good_strict",
    "marginal_exact",
    "clause_energy_exact",
    "gibbs_expectations",
    "conditional_marginal_table",
]

HARD_CAP = 26
_CHUNK_BITS = 20


def _check(f: Formula, beta: float) -> None:
    if f.num_vars > HARD_CAP:
        raise InstanceTooLarge(
            f"num_vars={f.num_vars} exceeds the enumeration cap {HARD_CAP}"
        )
    if not (beta >= 0):
        raise InvalidParameters(f"beta must be >= 0, got {beta}")


def _bit(idx: np.ndarray, var: int) -> np.ndarray:
    return (idx >> np.uint64(var)) & np.uint64(1)


def _iter_chunks(f: Formula):
    """Yield (assignment indices, energies) over the whole space, chunked."""
    cv, cn = clause_arrays(f)
    want = cn.astype(np.uint64)
    total = 1 << f.num_vars
    step = min(total, 1 << _CHUNK_BITS)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.uint64)
        e = np.zeros(idx.shape, dtype=np.int64)
        for j in range(f.num_clauses):
            viol = np.ones(idx.shape, dtype=bool)
            for i in range(f.k):
                viol &= _bit(idx, cv[j, i]) == want[j, i]
            e += viol
        yield idx, e


def energy_histogram(f: Formula) -> np.ndarray:
    """Counts of assignments at each energy level 0..M (sums to 2^N)."""
    if f.num_vars > HARD_CAP:
        raise InstanceTooLarge(
            f"num_vars={f.num_vars} exceeds the enumeration cap {HARD_CAP}"
        )
    hist = np.zeros(f.num_clauses + 1, dtype=np.int64)
    for _, e in _iter_chunks(f):
        hist += np.bincount(e, minlength=f.num_clauses + 1)
    return hist


@dataclass(frozen=True)
class ExactSummary:
    """Exact partition-function summary at one inverse temperature.

    ``log_z`` is log sum_x exp(-beta E(x)); at beta=inf it is the log of
    the satisfying-assignment count (-inf when unsatisfiable, in which
    case the energy moments are NaN).
    """

    num_vars: int
    num_clauses: int
    k: int
    beta: float
    log_z: float
    energy_mean: float
    energy_second_moment: float
    histogram: np.ndarray

    @property
    def energy_variance(self) -> float:
        return self.energy_second_moment - self.energy_mean**2


def _level_stats(hist: np.ndarray, beta: float) -> tuple[float, float, float]:
    levels = np.flatnonzero(hist)
    if math.isinf(beta):
        if hist[0] == 0:
            return -math.inf, math.nan, math.nan
        return math.log(float(hist[0])), 0.0, 0.0
    loght = np.log(hist[levels].astype(np.float64)) - beta * levels
    log_z = float(logsumexp(loght))
    w = np.exp(loght - log_z)
    mean = float(np.dot(w, levels))
    second = float(np.dot(w, levels.astype(np.float64) ** 2))
    return log_z, mean, second


def enumerate_exact(f: Formula, beta: float) -> ExactSummary:
    """Full enumeration: energy histogram plus partition-function stats."""
    _check(f, beta)
    hist = energy_histogram(f)
    log_z, mean, second = _level_stats(hist, beta)
    return ExactSummary(
        num_vars=f.num_vars,
        num_clauses=f.num_clauses,
        k=f.k,
        beta=beta,
        log_z=log_z,
        energy_mean=mean,
        energy_second_moment=second,
        histogram=hist,
    )


def count_good(f: Formula, zeta: float) -> int:
    """Number of assignments violating at most ``zeta`` clauses."""
    hist = energy_histogram(f)
    levels = np.arange(hist.size)
    return int(hist[levels <= zeta].sum())


def count_good_strict(f: Formula, zeta: float) -> int:
    """Number of assignments violating fewer than ``zeta`` clauses."""
    hist = energy_histogram(f)
    levels = np.arange(hist.size)
    return int(hist[levels < zeta].sum())


def _weights(e: np.ndarray, beta: float, e_min: int) -> np.ndarray:
    """Unnormalized Gibbs weights, shifted by the global minimum energy."""
    if math.isinf(beta):
        return (e == 0).astype(np.float64)
    return np.exp(-beta * (e - e_min).astype(np.float64))


@dataclass(frozen=True)
class ExactGibbs:
    """One-pass Gibbs expectations: marginals and per-clause violations."""

    beta: float
    log_z: float
    marginals: np.ndarray  # P(x_i = 1), shape (N,)
    clause_energies: np.ndarray  # <E_a>, shape (M,)
    energy_mean: float
    energy_second_moment: float


def gibbs_expectations(f: Formula, beta: float) -> ExactGibbs:
    """Exact marginals and clause violation probabilities in one pass.

    At beta=inf the measure is uniform on satisfying assignments; raises
    UndefinedConditional if there are none.
    """
    _check(f, beta)
    hist = energy_histogram(f)
    if math.isinf(beta) and hist[0] == 0:
        raise UndefinedConditional("no satisfying assignments at beta=inf")
    e_min = int(np.flatnonzero(hist)[0])
    cv, cn = clause_arrays(f)
    want = cn.astype(np.uint64)
    total_w = 0.0
    w_var = np.zeros(f.num_vars)
    w_clause = np.zeros(f.num_clauses)
    for idx, e in _iter_chunks(f):
        w = _weights(e, beta, e_min)
        total_w += float(w.sum())
        for v in range(f.num_vars):
            bit = ((idx >> np.uint64(v)) & np.uint64(1)).astype(bool)
            w_var[v] += float(w[bit].sum())
        for j in range(f.num_clauses):
            viol = np.ones(idx.shape, dtype=bool)
            for i in range(f.k):
                viol &= ((idx >> cv[j, i]) & np.uint64(1)) == want[j, i]
            w_clause[j] += float(w[viol].sum())
    log_z, mean, second = _level_stats(hist, beta)
    return ExactGibbs(
        beta=beta,
        log_z=log_z,
        marginals=w_var / total_w,
        clause_energies=w_clause / total_w,
        energy_mean=mean,
        energy_second_moment=second,
    )


def marginal_exact(
    f: Formula, beta: float, i: int, condition: dict[int, bool] | None = None
) -> float:
    """Exact conditional Gibbs marginal P(x_i = 1 | condition).

    ``condition`` maps variable indices to fixed boolean values.  Raises
    UndefinedConditional when the conditioning event carries no weight
    (only possible at beta=inf).
    """
    _check(f, beta)
    if not 0 <= i < f.num_vars:
        raise InvalidParameters(f"variable {i} out of range")
    condition = condition or {}
    for v in condition:
        if not 0 <= v < f.num_vars:
            raise InvalidParameters(f"conditioned variable {v} out of range")
    hist = energy_histogram(f)
    e_min = int(np.flatnonzero(hist)[0])
    num = 0.0
    den = 0.0
    for idx, e in _iter_chunks(f):
        w = _weights(e, beta, e_min)
        mask = np.ones(idx.shape, dtype=bool)
        for v, val in condition.items():
            bit = ((idx >> np.uint64(v)) & np.uint64(1)) == np.uint64(1)
            mask &= bit == bool(val)
        wi = w * mask
        den += float(wi.sum())
        bit_i = ((idx >> np.uint64(i)) & np.uint64(1)).astype(bool)
        num += float(wi[bit_i].sum())
    if den == 0.0:
        raise UndefinedConditional("conditioning event has zero Gibbs weight")
    return num / den


def clause_energy_exact(f: Formula, beta: float, a: int) -> float:
    """Exact probability that clause ``a`` is violated under the Gibbs law."""
    if not 0 <= a < f.num_clauses:
        raise InvalidParameters(f"clause {a} out of range")
    return float(gibbs_expectations(f, beta).clause_energies[a])


def conditional_marginal_table(
    f: Formula, beta: float, target: int, given: list[int] | tuple[int, ...]
) -> tuple[np.ndarray, np.ndarray]:
    """P(x_target = 1 | pattern) for every assignment pattern of ``given``.

    Pattern p sets given[j] to bit j of p.  Returns (probabilities,
    pattern weights); entries with zero weight are NaN.  Used to take
    exact maxima/minima of a conditional marginal over all boundary
    conditions on small instances.
    """
    _check(f, beta)
    given = list(given)
    b = len(given)
    if b > 20:
        raise InstanceTooLarge(f"{b} conditioning variables is too many")
    hist = energy_histogram(f)
    e_min = int(np.flatnonzero(hist)[0])
    acc = np.zeros(1 << (b + 1))
    for idx, e in _iter_chunks(f):
        w = _weights(e, beta, e_min)
        pattern = np.zeros(idx.shape, dtype=np.int64)
        for j, v in enumerate(given):
            pattern |= (((idx >> np.uint64(v)) & np.uint64(1)) << j).astype(np.int64)
        bit_t = ((idx >> np.uint64(target)) & np.uint64(1)).astype(np.int64)
        acc += np.bincount((pattern << 1) | bit_t, weights=w, minlength=acc.size)
    w0 = acc[0::2]
    w1 = acc[1::2]
    tot = w0 + w1
    with np.errstate(invalid="ignore"):
        p1 = np.where(tot > 0, w1 / np.where(tot > 0, tot, 1.0), np.nan)
    return p1, tot
