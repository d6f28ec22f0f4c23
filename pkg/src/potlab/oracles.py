"""Brute-force reference computations used by the tests.

None of these are on the library's main code path; each reaches its
answer by a different route from the primary implementation.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, orth
from scipy.optimize import linprog

from .classification import subset_cap
from .errors import Infeasible, SupportTooLargeForEnumeration
from .invariant_measures import stationary_distribution
from .potential import RECURRENT, class_decomposition, potential_kernel
from .resolvent import _make_generator, _resolvent, weighted_space


@dataclass(frozen=True)
class OracleConfig:
    series_steps: int = 0          # 0 means 10**6 // n
    uniformization_rate: float = 0.0  # 0 means 2 max|L_ii| (at least 1)
    subset_cap: int = 0            # 0 means the library cap

    def resolved(self, gen):
        lam = self.uniformization_rate or 2.0 * max(1.0, float(np.abs(np.diag(gen.L)).max()))
        steps = self.series_steps or max(1, 10 ** 6 // gen.n)
        cap = self.subset_cap or subset_cap()
        if steps < 1:
            raise ValueError("series_steps must be >= 1")
        if lam <= float(np.abs(np.diag(gen.L)).max()):
            raise ValueError("uniformization rate must exceed every exit rate")
        return OracleConfig(series_steps=steps, uniformization_rate=lam, subset_cap=min(cap, 24))


@dataclass(frozen=True)
class SeriesResult:
    U: np.ndarray           # partial sums; meaningless where ``diverging``
    diverging: np.ndarray   # boolean mask
    steps: int


def potential_series_oracle(gen, cfg=OracleConfig()):
    """``h sum_k P_h^k`` with ``P_h = I + L / lambda`` by repeated squaring.

    The partial sum over ``2N`` terms is built from the one over ``N``
    terms as ``S_2N = S_N + P^N S_N``.  An entry is flagged as diverging
    when its last doubling still added more than a quarter of its value.
    """
    cfg = cfg.resolved(gen)
    lam = cfg.uniformization_rate
    n = gen.n
    P = np.eye(n) + gen.L / lam
    S = np.eye(n)       # sum_{k < 1}
    Pk = P.copy()       # P^1
    terms = 1
    prev = S
    while terms < cfg.series_steps:
        prev = S
        S = S + Pk @ S
        Pk = Pk @ Pk
        terms *= 2
    inc = S - prev
    diverging = inc > 0.25 * np.maximum(S, 1e-300)
    diverging &= S > 0
    return SeriesResult(U=S / lam, diverging=diverging, steps=terms)


def reduced_lp_oracle(gen, f, beta=0.0):
    """``min sum v`` subject to ``v >= f``, ``v >= 0`` and ``(beta I - L) v >= 0``."""
    f = np.asarray(f, dtype=float)
    n = gen.n
    M = beta * np.eye(n) - gen.L
    res = linprog(np.ones(n), A_ub=-M, b_ub=np.zeros(n),
                  bounds=[(max(0.0, fi), None) for fi in f], method="highs")
    if res.status != 0:
        raise Infeasible(res.message)
    return res.x


def absorbing_bruteforce_oracle(gen, w, cap=None):
    """Every ``A ⊆ support(m)`` with ``U 1_{E \\ A} = 0`` on ``A``, by direct enumeration."""
    idx = np.asarray(w.support)
    k = idx.size
    cap = subset_cap() if cap is None else cap
    if k > cap:
        raise SupportTooLargeForEnumeration(f"|support| = {k} exceeds cap {cap}")
    pot = potential_kernel(gen)
    # positive (including infinite) potential from support states to each state
    hits = pot.U[idx] > 0
    codes = np.arange(2 ** k)
    member = (codes[:, None] >> np.arange(k)[None, :]) & 1  # (2^k, k)
    out_mask = np.ones((codes.size, gen.n), dtype=bool)
    out_mask[:, idx] = member == 0
    # leak[c, i] = support state i reaches some state outside A_c
    leak = (hits[None, :, :] & out_mask[:, None, :]).any(axis=2)
    bad = (leak & (member == 1)).any(axis=1)
    found = [frozenset(int(idx[i]) for i in range(k) if member[c, i]) for c in codes[~bad]]
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def sector_oracle(sym, antisym):
    """Sector constant from the pencil ``(A^T S^+ A, S)`` on the range of ``S``."""
    P = orth(sym, rcond=1e-10)
    if P.shape[1] == 0:
        return 1.0
    S = P.T @ sym @ P
    A = P.T @ antisym @ P
    lam = eigh(A.T @ np.linalg.solve(S, A), S, eigvals_only=True)
    return float(np.sqrt(1.0 + max(0.0, lam.max())))


def stationary_oracle(block, steps=20000):
    """Stationary law of an irreducible conservative block by power iteration on the uniformized chain."""
    lam = 2.0 * max(1.0, float(np.abs(np.diag(block)).max()))
    P = np.eye(block.shape[0]) + block / lam
    pi = np.full(block.shape[0], 1.0 / block.shape[0])
    for _ in range(steps):
        nxt = pi @ P
        if np.abs(nxt - pi).max() < 1e-15:
            break
        pi = nxt
    return pi / pi.sum()


# ---------------------------------------------------------------- random instances

def random_generator(rng, n):
    """Rates i.i.d. uniform on [0, 1], half of them zeroed; each row conservative with probability 1/2."""
    L = rng.uniform(0.0, 1.0, size=(n, n)) * (rng.uniform(size=(n, n)) < 0.5)
    np.fill_diagonal(L, 0.0)
    kill = np.where(rng.uniform(size=n) < 0.5, 0.0, rng.uniform(0.0, 1.0, size=n))
    np.fill_diagonal(L, -L.sum(axis=1) - kill)
    return _make_generator(L)


def random_measure(gen, rng, degenerate=False):
    """A sub-invariant probability for ``gen``.

    Built as a positive mixture of class stationary laws plus ``nu U_T``
    where ``T`` is the set of states that never reach a recurrent class and
    ``nu >= 0`` lives on ``T``.  Such an ``m`` satisfies ``m^T L <= 0``.
    With ``degenerate`` some components are dropped so the support is a
    proper subset.
    """
    n = gen.n
    dec = class_decomposition(gen)
    pot = potential_kernel(gen)
    rec = dec.recurrent_mask(n)
    reach_rec = np.isinf(pot.U).any(axis=1)
    T = np.flatnonzero(~reach_rec)
    parts = []
    for c, t in zip(dec.classes, dec.class_type):
        if t == RECURRENT:
            mu = np.zeros(n)
            mu[list(c)] = stationary_distribution(gen.L[np.ix_(c, c)])
            parts.append(mu)
    if T.size:
        nu = rng.uniform(size=T.size) * (rng.uniform(size=T.size) < 0.7)
        if degenerate:
            nu *= rng.uniform(size=T.size) < 0.5
        if not parts and not nu.any():
            nu[rng.integers(T.size)] = 1.0
        if nu.any():
            tail = np.zeros(n)
            tail[T] = nu @ np.linalg.solve(-gen.L[np.ix_(T, T)], np.eye(T.size))
            parts.append(tail)
    weights = rng.uniform(0.2, 1.0, size=len(parts))
    if degenerate and len(parts) > 1:
        weights *= rng.uniform(size=len(parts)) < 0.5
    if not weights.any():
        weights[rng.integers(len(parts))] = 1.0
    m = sum(wt * p for wt, p in zip(weights, parts))
    m[m < 1e-14 * m.max()] = 0.0
    return m / m.sum()


def random_instance(rng, n_max=10, degenerate=None):
    """``(Generator, WeightedSpace)`` with ``n <= n_max``; about 20% degenerate supports by default."""
    n = int(rng.integers(1, n_max + 1))
    gen = random_generator(rng, n)
    if degenerate is None:
        degenerate = rng.uniform() < 0.2
    m = random_measure(gen, rng, degenerate)
    return gen, weighted_space(gen, m, tol=1e-10)
