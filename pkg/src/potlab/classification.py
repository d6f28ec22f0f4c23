"""m-transience, m-recurrence, absorbing sets, irreducibility and invariance.

Every notion here is "modulo m": only states in ``support(m)`` are ever
compared.  Each ``is_*`` function evaluates all the equivalent conditions of
the corresponding statement separately and records whether they agree.
"""

import os
from dataclasses import dataclass, field
from math import inf

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import SupportTooLargeForEnumeration, UnsupportedCase
from .potential import RECURRENT, class_decomposition, potential_kernel, reachability
from .report import build_report
from .resolvent import _resolvent, adjoint_generator, compressed, cone_membership, excessive_regularize

ALPHAS = (0.5, 1.0, 2.0)
EQ_TOL = 1e-9
DEFAULT_SUBSET_CAP = 24


def subset_cap():
    return int(os.environ.get("POTLAB_SUBSET_CAP", DEFAULT_SUBSET_CAP))


def _close(a, b, tol=EQ_TOL):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)), float(np.abs(b).max(initial=0.0)))
    return bool(np.all(np.abs(a - b) <= tol * scale))


def _compressed_adjoint(Lh, mh):
    return (Lh.T * mh[None, :]) / mh[:, None]


def _conservative_on_support(Lh, adjoint=False, mh=None):
    """``alpha U_alpha 1 = 1`` (or the adjoint version) on the support, at every sampled alpha."""
    M = _compressed_adjoint(Lh, mh) if adjoint else Lh
    one = np.ones(M.shape[0])
    return all(_close(a * _resolvent(M, a) @ one, one) for a in ALPHAS)


# ---------------------------------------------------------------- LP helpers

def _lp_max(c, A_ub, b_ub, bounds, A_eq=None, b_eq=None):
    res = linprog(-np.asarray(c), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:  # pragma: no cover - feasible and bounded by construction
        raise RuntimeError(f"LP failed: {res.message}")
    return -res.fun, res.x


def bounded_supermedian_slack(Lh):
    """``max sum(-L v)`` over ``{0 <= v <= 1, -L v >= 0}``.

    Zero exactly when every bounded supermedian vector is harmonic.
    """
    k = Lh.shape[0]
    val, x = _lp_max(-Lh.sum(axis=0), Lh, np.zeros(k), [(0.0, 1.0)] * k)
    return val, x


def excessive_ray_slack(Lh):
    """Same objective over the normalized cone ``{v >= 0, sum v = 1, -L v >= 0}``."""
    k = Lh.shape[0]
    val, x = _lp_max(-Lh.sum(axis=0), Lh, np.zeros(k), [(0.0, None)] * k,
                     A_eq=np.ones((1, k)), b_eq=np.ones(1))
    return val, x


def excessive_spread(Lh):
    """Largest ``v_i - mean(v)`` over bounded excessive ``v``; 0 iff all are constant."""
    k = Lh.shape[0]
    best, arg = 0.0, None
    for i in range(k):
        c = -np.full(k, 1.0 / k)
        c[i] += 1.0
        val, x = _lp_max(c, Lh, np.zeros(k), [(0.0, 1.0)] * k)
        if val > best:
            best, arg = val, x
    return best, arg


# ---------------------------------------------------------------- transience

def _transience_witness(pot, f, idx):
    """The f0 of the transience proof: ``inf(1, sum 2^-n n^-1 f 1_[Uf <= n])``.

    ``f`` is first scaled so that ``Uf <= 1`` on the support; otherwise the
    weights ``2^-n`` underflow for large potentials.
    """
    Uf = pot.apply(f)
    top = Uf[idx][np.isfinite(Uf[idx])].max(initial=0.0)
    if top > 1.0:
        f = f / top
        Uf = Uf / top
    f0 = np.zeros_like(f)
    for x in range(f.size):
        if f[x] <= 0 or not np.isfinite(Uf[x]):
            continue
        start = max(1, int(np.ceil(Uf[x])))
        tail = sum(0.5 ** k / k for k in range(start, start + 80))
        f0[x] = min(1.0, f[x] * tail)
    return f0, pot.apply(f0)


def is_m_transient(gen, w, gen_star=None):
    Lh, mh, idx = compressed(gen, w)
    star = gen_star if gen_star is not None else adjoint_generator(gen, w)
    pot = potential_kernel(gen)

    dec = class_decomposition(gen)
    graph_ok = all(dec.class_type[dec.class_of[i]] != RECURRENT for i in idx)

    dec_s = class_decomposition(star)
    graph_star_ok = all(dec_s.class_type[dec_s.class_of[i]] != RECURRENT for i in idx)

    f = np.zeros(gen.n)
    f[idx] = 1.0
    f0, Uf0 = _transience_witness(pot, f, idx)
    witness_ok = bool(np.all(f0[idx] > 0) and np.all(Uf0 <= 1.0 + 1e-9))

    basis_ok = all(np.all(np.isfinite(pot.U[idx, y])) for y in idx)

    verdicts = {"P2.1.i": graph_ok, "P2.1.ii": graph_star_ok, "P2.1.iii": witness_ok, "P2.1.iv": basis_ok}
    return build_report(
        "m-transience",
        verdicts,
        lambda p: p.equivalent(*verdicts),
        witnesses={"P2.1.iii": f0},
    )


# ---------------------------------------------------------------- recurrence

def _definition_recurrent(pot, idx):
    for y in idx:
        col = pot.U[idx, y]
        if np.any((col > 0) & np.isfinite(col)):
            return False
    return True


def is_m_recurrent(gen, w, gen_star=None):
    Lh, mh, idx = compressed(gen, w)
    star = gen_star if gen_star is not None else adjoint_generator(gen, w)
    pot = potential_kernel(gen)
    pot_s = potential_kernel(star)

    one_s = np.zeros(gen.n)
    one_s[idx] = 1.0
    slack_v, v_arg = bounded_supermedian_slack(Lh)
    slack_r, r_arg = excessive_ray_slack(Lh)
    tol = 1e-9 * max(1.0, float(np.abs(Lh).max(initial=0.0)))
    verdicts = {
        "P2.3.i": _definition_recurrent(pot, idx),
        "P2.3.ii": _definition_recurrent(pot_s, idx),
        "P2.3.iii": bool(np.all(np.isinf(pot.apply(one_s)[idx]))),
        "P2.3.iv": bool(np.all(np.isinf(np.diag(pot.U)[idx]))),
        "P2.3.v": slack_v <= tol,
        "P2.3.v'": slack_r <= tol,
        "C2.4.ii": _conservative_on_support(Lh),
        "C2.4.iii": _conservative_on_support(Lh, adjoint=True, mh=mh),
    }
    witnesses = {}
    if slack_v > tol:
        witnesses["P2.3.v"] = _embed(v_arg, idx, gen.n)
    return build_report(
        "m-recurrence",
        verdicts,
        lambda p: p.equivalent(*verdicts),
        witnesses=witnesses,
    )


def _embed(x, idx, n):
    out = np.zeros(n)
    out[idx] = x
    return out


# ---------------------------------------------------------------- absorbing sets

@dataclass(frozen=True)
class AbsorbingLattice:
    sets: tuple             # frozensets of state indices, sorted by (size, members)
    atoms: tuple            # minimal nonempty members
    support: tuple
    exhaustive: bool = True
    closure_verified: bool = True
    witnesses: dict = field(default_factory=dict)

    def __contains__(self, A):
        return frozenset(A) in set(self.sets)


def _closures(gen, idx):
    R = reachability(gen.L)
    return {int(x): frozenset(int(y) for y in idx if R[x, y]) for x in idx}


def _sort_sets(family):
    return tuple(sorted(family, key=lambda s: (len(s), sorted(s))))


def _minimal(sets):
    nonempty = [s for s in sets if s]
    return _sort_sets({s for s in nonempty if not any(t < s for t in nonempty)})


def absorbing_sets(gen, w, cap=None, strict=False, with_witnesses=False, rng=None):
    """All U-absorbing subsets of ``support(m)``.

    A subset is absorbing mod m exactly when no state in it reaches a support
    state outside it, so the lattice consists of the unions of reachability
    closures.  Beyond ``cap`` support states only the atoms are returned
    (or :class:`SupportTooLargeForEnumeration` is raised when ``strict``).
    """
    idx = w.idx
    cap = subset_cap() if cap is None else cap
    clos = _closures(gen, idx)
    atoms = _minimal(set(clos.values()))
    if len(idx) > cap:
        if strict:
            raise SupportTooLargeForEnumeration(f"|support| = {len(idx)} exceeds cap {cap}")
        return AbsorbingLattice(sets=(frozenset(),) + atoms, atoms=atoms, support=tuple(w.support),
                                exhaustive=False, closure_verified=False)
    family = {frozenset()}
    for c in set(clos.values()):
        family |= {F | c for F in family}
    sets = _sort_sets(family)
    verified = _check_closure(family, rng)
    witnesses = {}
    if with_witnesses:
        witnesses = {A: absorbing_witness(gen, w, A) for A in sets}
    return AbsorbingLattice(sets=sets, atoms=atoms, support=tuple(w.support), exhaustive=True,
                            closure_verified=verified, witnesses=witnesses)


def _check_closure(family, rng=None, max_pairs=4096):
    items = list(family)
    if len(items) ** 2 <= max_pairs:
        pairs = [(a, b) for a in items for b in items]
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        ii = rng.integers(0, len(items), size=(max_pairs, 2))
        pairs = [(items[a], items[b]) for a, b in ii]
    return all((a | b) in family and (a & b) in family for a, b in pairs)


def absorbing_witness(gen, w, A):
    """Excessive ``u`` with ``A = [u = 0]`` on the support."""
    v = np.zeros(gen.n)
    v[[i for i in w.support if i not in A]] = 1.0
    return excessive_regularize(v, gen, w)


def absorbing_report(gen, w, A, gen_star=None):
    """Evaluate the five equivalent descriptions of an absorbing set."""
    idx = w.idx
    n = gen.n
    A = frozenset(int(a) for a in A)
    inA = np.zeros(n, dtype=bool)
    inA[list(A)] = True
    onS = np.zeros(n, dtype=bool)
    onS[idx] = True
    star = gen_star if gen_star is not None else adjoint_generator(gen, w)
    pot = potential_kernel(gen)
    pot_s = potential_kernel(star)

    leak = pot.apply((~inA).astype(float))
    i_ok = bool(np.all(leak[inA & onS] == 0))

    back = pot_s.apply(inA.astype(float))
    ii_ok = bool(np.all(back[~inA & onS] == 0))

    B = leak == 0
    iii_ok = cone_membership((~B).astype(float), gen, 0.0).is_excessive and bool(np.all(B[onS] == inA[onS]))

    try:
        u = absorbing_witness(gen, w, A)
        iv_ok = cone_membership(u, gen, 0.0, tol=1e-9).is_excessive and bool(
            np.all((np.abs(u[onS]) <= 1e-12) == inA[onS]))
    except Exception:
        u, iv_ok = None, False

    # u = inf off B and 0 on B is excessive iff U_alpha 1_{E \ B} vanishes on B
    ua = _resolvent(gen.L, 1.0) @ (~B).astype(float)
    v_ok = bool(np.all(ua[B] <= 1e-14)) and bool(np.all(B[onS] == inA[onS]))

    verdicts = {"P2.4.i": i_ok, "P2.4.ii": ii_ok, "P2.4.iii": iii_ok, "P2.4.iv": iv_ok, "P2.4.v": v_ok}
    return build_report(
        "absorbing sets",
        verdicts,
        lambda p: p.equivalent(*verdicts),
        witnesses={"P2.4.iv": u, "P2.4.iii": np.flatnonzero(B)},
    )


# ---------------------------------------------------------------- irreducibility

def _support_atoms(gen, idx):
    return _minimal(set(_closures(gen, idx).values()))


def is_m_irreducible(gen, w, gen_star=None, transient=None, recurrent=None):
    """Return ``(irreducible, report)``.

    The report carries the dichotomy check and the four equivalent
    conditions for irreducible recurrence.
    """
    Lh, mh, idx = compressed(gen, w)
    S = frozenset(int(i) for i in idx)
    star = gen_star if gen_star is not None else adjoint_generator(gen, w)
    irreducible = _support_atoms(gen, idx) == (S,)
    irreducible_star = _support_atoms(star, idx) == (S,)
    if transient is None:
        transient = is_m_transient(gen, w, star).verdict
    if recurrent is None:
        recurrent = is_m_recurrent(gen, w, star).verdict
    pot = potential_kernel(gen)

    ii = all(np.all(np.isinf(pot.U[idx, y])) for y in idx)
    iii = True
    for y in range(gen.n):
        col = pot.U[idx, y]
        if not (np.all(col == 0) or np.all(np.isinf(col))):
            iii = False
            break
    spread, arg = excessive_spread(Lh)
    iv = spread <= 1e-9 and _conservative_on_support(Lh)

    verdicts = {
        "irreducible": irreducible,
        "irreducible[adjoint]": irreducible_star,
        "P2.5": (not irreducible) or (bool(transient) != bool(recurrent)),
        "P2.9.i": irreducible and bool(recurrent),
        "P2.9.ii": ii,
        "P2.9.iii": iii,
        "P2.9.iv": iv,
    }

    def pattern(p):
        p.equivalent("irreducible", "irreducible[adjoint]")
        p.require(verdicts["P2.5"], "P2.5 dichotomy")
        p.equivalent("P2.9.i", "P2.9.ii", "P2.9.iii", "P2.9.iv")

    witnesses = {}
    if arg is not None and spread > 1e-9:
        witnesses["P2.9.iv"] = _embed(arg, idx, gen.n)
    report = build_report("m-irreducibility", verdicts, pattern, witnesses=witnesses)
    return irreducible, report


def invariant_partition(gen, w):
    """Atoms of the sigma-algebra of invariant sets: weak components of the support graph."""
    Lh, _, idx = compressed(gen, w)
    A = Lh > 0
    np.fill_diagonal(A, False)
    _, lab = connected_components(csr_matrix(A.astype(float)), directed=True, connection="weak")
    groups = {}
    for i, l in zip(idx, lab):
        groups.setdefault(l, []).append(int(i))
    return tuple(sorted((tuple(g) for g in groups.values()), key=lambda g: g[0]))


# ---------------------------------------------------------------- invariant functions

def invariant_function_test(gen, w, u, p=2.0, recurrent=None):
    """Evaluate the characterizations of a U-invariant function ``u``.

    Condition keys: ``T2.19.i`` (fixed by
    ``alpha U_alpha``), ``.ii`` (fixed by the adjoint), ``.iii`` (multiplier
    commutes with ``U_alpha``), ``.iv`` (both one-point identities), ``.v``
    (measurable w.r.t. invariant sets).  ``P2.16.iii`` is the symmetric
    pairing identity and ``P2.18.ii`` the inequality version of ``.iv``.
    ``R2.16.iii`` (one-sided identity) is recorded but not constrained.
    """
    if not (p == inf or 1.0 <= p):
        raise ValueError("p must lie in [1, inf]")
    if p == inf and not np.isfinite(w.mass) and not recurrent:
        raise UnsupportedCase("p = inf with infinite mass needs the m-recurrent hypothesis")
    Lh, mh, idx = compressed(gen, w)
    u = np.asarray(u, dtype=float)
    us = u[idx] if u.shape == (gen.n,) else u
    Ls = _compressed_adjoint(Lh, mh)
    k = Lh.shape[0]
    one = np.ones(k)

    fixed, fixed_s, commute, both, ineq, one_sided, pairing = [], [], [], [], [], [], []
    for a in ALPHAS:
        U = _resolvent(Lh, a)
        Us = _resolvent(Ls, a)
        fixed.append(_close(a * U @ us, us))
        fixed_s.append(_close(a * Us @ us, us))
        commute.append(_close(U * us[None, :], us[:, None] * U))
        lhs, rhs = U @ us, us * (U @ one)
        lhs_s, rhs_s = Us @ us, us * (Us @ one)
        one_sided.append(_close(lhs, rhs))
        both.append(_close(lhs, rhs) and _close(lhs_s, rhs_s))
        sc = EQ_TOL * max(1.0, float(np.abs(us).max(initial=0.0)))
        ineq.append(bool(np.all(lhs >= rhs - sc) and np.all(lhs_s >= rhs_s - sc)))
        W = (mh * us)[:, None]
        pairing.append(_close(W * Us, (W * U).T))

    const_on_atoms = True
    pos = {int(i): j for j, i in enumerate(idx)}
    for atom in invariant_partition(gen, w):
        vals = us[[pos[i] for i in atom]]
        if not _close(vals, np.full(vals.size, vals[0])):
            const_on_atoms = False
            break

    verdicts = {
        "T2.19.i": fixed[1],
        "T2.19.ii": fixed_s[1],
        "T2.19.iii": commute[1],
        "T2.19.iv": both[1],
        "T2.19.v": const_on_atoms,
        "P2.16.iii": pairing[1],
        "P2.18.ii": ineq[1],
        "R2.16.iii": one_sided[1],
    }
    markov = _conservative_on_support(Lh) or _conservative_on_support(Lh, adjoint=True, mh=mh)
    if recurrent is None:
        recurrent = is_m_recurrent(gen, w).verdict

    def pattern(pt):
        for name, series in (("i", fixed), ("ii", fixed_s), ("iii", commute), ("iv", both)):
            pt.require(len(set(series)) == 1, f"T2.19.{name} alpha-independent")
        pt.equivalent("T2.19.i", "T2.19.ii")
        pt.implies("T2.19.i", "T2.19.iii")
        pt.equivalent("T2.19.iii", "T2.19.iv", "T2.19.v", "P2.16.iii")
        pt.equivalent("P2.18.ii", "T2.19.iv")
        if markov:
            pt.equivalent("T2.19.i", "T2.19.iii")
        if recurrent:
            pt.equivalent("T2.19.i", "T2.19.ii", "T2.19.iii", "T2.19.v")

    notes = [f"p = {p} (label only on a finite space)"]
    if markov:
        notes.append("alpha U_alpha 1 = 1 or alpha U*_alpha 1 = 1 m-a.e.: all five conditions equivalent")
    return build_report("invariant functions", verdicts, pattern, notes=notes)


def invariant_function_space(gen, w):
    """Basis (columns, on the support) of all U-invariant functions.

    Solved as the null space of the edge constraints ``L_ij (u_i - u_j) = 0``,
    independently of the graph components used by :func:`invariant_partition`.
    """
    Lh, _, _ = compressed(gen, w)
    k = Lh.shape[0]
    rows = []
    for i, j in zip(*np.nonzero(Lh > 0)):
        if i != j:
            r = np.zeros(k)
            r[i], r[j] = Lh[i, j], -Lh[i, j]
            rows.append(r)
    if not rows:
        return np.eye(k)
    _, s, vt = np.linalg.svd(np.array(rows))
    rank = int(np.sum(s > 1e-10 * s.max()))
    return vt[rank:].T
