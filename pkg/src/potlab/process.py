"""Everywhere (not mod m) classification, restriction and trivial modification.

A set ``B`` is m-inessential when ``m(B) = 0`` and no positive rate leads
from ``E \\ B`` into ``B``.  Removing such a set changes nothing m-a.e.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eig

from .classification import ALPHAS, is_m_irreducible, is_m_recurrent, is_m_transient
from .errors import MassEscapes, NotInessential
from .potential import RECURRENT, class_decomposition, potential_kernel, reachability
from .report import build_report
from .resolvent import _make_generator, _resolvent, cone_membership, weighted_space


def _as_set(A, n):
    A = sorted({int(a) for a in A})
    if any(a < 0 or a >= n for a in A):
        raise IndexError(f"state index out of range in {A}")
    return A


def _sub_invariant(gen, mu, tol=1e-10):
    mu = np.asarray(mu, dtype=float)
    return bool(np.all(mu >= 0) and mu.sum() > 0 and np.all(mu @ gen.L <= tol * gen.scale * max(1.0, mu.max())))


def bottom_perron_measures(gen):
    """Left Perron vectors of the closed classes, each supported on its class.

    Every such vector is a sub-invariant measure; together with the class
    structure they detect nontrivial closed sets.
    """
    dec = class_decomposition(gen)
    out = []
    sources = {a for a, _ in dec.condensation}
    for k, c in enumerate(dec.classes):
        if k in sources:
            continue
        block = gen.L[np.ix_(c, c)]
        vals, vecs = eig(block.T)
        j = int(np.argmax(vals.real))
        v = np.abs(vecs[:, j].real)
        mu = np.zeros(gen.n)
        mu[list(c)] = v / v.sum()
        out.append(mu)
    return out


def is_reference(gen, mu, pot=None):
    """``mu`` is a reference measure: every state with a nonzero potential column carries mass."""
    pot = potential_kernel(gen) if pot is None else pot
    mu = np.asarray(mu, dtype=float)
    live = np.any(pot.U != 0, axis=0)
    return bool(np.all(mu[live] > 0))


@dataclass(frozen=True)
class StrictReport:
    strict_transient: bool
    strict_recurrent: bool
    strict_irreducible: bool
    every_state_recurrent: bool
    reference_measure_ok: tuple
    report: object = None


def strict_classify(gen, candidate_measures=(), w=None):
    """Classify ``gen`` everywhere, and test candidate reference measures.

    ``strict_recurrent`` means ``U 1_B`` is identically 0 or identically
    infinite for every ``B``.  When ``w`` is given the three-way
    irreducibility equivalence is evaluated with the candidates, the closed
    class Perron measures and ``m`` itself as the sub-invariant family.
    """
    pot = potential_kernel(gen)
    dec = class_decomposition(gen)
    transient = all(t != RECURRENT for t in dec.class_type)
    every_rec = all(t == RECURRENT for t in dec.class_type)
    cols = pot.U
    recurrent = all(np.all(cols[:, y] == 0) or np.all(np.isinf(cols[:, y])) for y in range(gen.n))
    irreducible = bool(reachability(gen.L).all())
    refs = tuple(is_reference(gen, mu, pot) for mu in candidate_measures)

    report = None
    if w is not None:
        family = [np.asarray(mu, dtype=float) for mu in candidate_measures]
        family += bottom_perron_measures(gen) + [w.m]
        sub = [mu for mu in family if _sub_invariant(gen, mu)]
        m_irr = is_m_irreducible(gen, w)[0]
        verdicts = {
            "P2.1.16.i": irreducible,
            "P2.1.16.ii": all(is_reference(gen, mu, pot) for mu in sub),
            "P2.1.16.iii": m_irr and is_reference(gen, w.m, pot),
        }
        report = build_report("strict irreducibility", verdicts,
                              lambda p: p.equivalent(*verdicts),
                              notes=("quasi-Lindelof property holds trivially on a finite space",))
    return StrictReport(
        strict_transient=transient,
        strict_recurrent=recurrent,
        strict_irreducible=irreducible,
        every_state_recurrent=every_rec,
        reference_measure_ok=refs,
        report=report,
    )


def _check_inessential(gen, w, A):
    A = _as_set(A, gen.n)
    rest = np.setdiff1d(np.arange(gen.n), A)
    if rest.size and np.any(w.m[rest] > 0):
        raise NotInessential(f"complement of {A} carries m-mass {float(w.m[rest].sum())}")
    if rest.size and A and np.any(gen.L[np.ix_(A, rest)] > 0):
        raise NotInessential(f"positive rate from {A} into its complement")
    return A, rest


def restriction(gen, w, A):
    """Generator and measure of the restriction to ``A`` (its complement must be m-inessential)."""
    A, _ = _check_inessential(gen, w, A)
    sub = _make_generator(gen.L[np.ix_(A, A)], [gen.labels[i] for i in A])
    return sub, weighted_space(sub, w.m[A])


def trivial_modification(gen, w, A):
    """Generator of ``1_A U_a(f 1_A) + f 1_{E \\ A} / (1 + a)``: block on ``A``, unit killing elsewhere."""
    A, rest = _check_inessential(gen, w, A)
    L = -np.eye(gen.n)
    L[np.ix_(A, A)] = gen.L[np.ix_(A, A)]
    return _make_generator(L, gen.labels)


def m_version_residual(gen, mod, w):
    """Largest ``|(U^A_a - U_a) f|`` on the support over basis ``f`` and sampled ``a``."""
    idx = w.idx
    return max(float(np.abs(_resolvent(mod.L, a)[idx] - _resolvent(gen.L, a)[idx]).max()) for a in ALPHAS)


def inessential_iterates(gen, E0):
    """Sequence ``E_{k+1} = E_k ∩ [U 1_{E \\ E_k} = 0]`` up to its fixed point."""
    pot = potential_kernel(gen)
    cur = frozenset(_as_set(E0, gen.n))
    seq = [cur]
    for _ in range(gen.n + 1):
        out = np.ones(gen.n)
        out[list(cur)] = 0.0
        leak = pot.apply(out)
        nxt = frozenset(x for x in cur if leak[x] == 0)
        if nxt == cur:
            return seq
        seq.append(nxt)
        cur = nxt
    raise RuntimeError("inessential iteration did not stabilize")  # pragma: no cover


def inessential_closure(gen, w, E0):
    """Largest ``F ⊆ E0`` whose complement is m-inessential."""
    E0 = _as_set(E0, gen.n)
    off = np.setdiff1d(np.arange(gen.n), E0)
    if off.size and np.any(w.m[off] > 0):
        raise ValueError("E0 must carry all of m")
    F = sorted(inessential_iterates(gen, E0)[-1])
    rest = np.setdiff1d(np.arange(gen.n), F)
    if rest.size and np.any(w.m[rest] > 0):
        raise MassEscapes(f"fixed point {F} loses m-mass")
    return tuple(F)


def _verdicts(gen, w):
    t = is_m_transient(gen, w).verdict
    r = is_m_recurrent(gen, w).verdict
    return (t, r, is_m_irreducible(gen, w, transient=t, recurrent=r)[0])


def modification_equivalence_report(gen, w, transient=None, recurrent=None, irreducible=None):
    """Constructive links between m-classification and everywhere classification."""
    n = gen.n
    if transient is None:
        transient = is_m_transient(gen, w).verdict
    if recurrent is None:
        recurrent = is_m_recurrent(gen, w).verdict
    if irreducible is None:
        irreducible = is_m_irreducible(gen, w, transient=transient, recurrent=recurrent)[0]
    pot = potential_kernel(gen)
    notes = []

    # transient side: A = [U f0 < inf] for an everywhere positive f0
    A_t = [x for x in range(n) if np.isfinite(pot.apply(np.ones(n))[x])]
    try:
        mod_t = trivial_modification(gen, w, A_t)
        found_t = strict_classify(mod_t).strict_transient
    except NotInessential:
        found_t = False

    # recurrent side: largest closed part of the support, then restrict
    iters = inessential_iterates(gen, w.support)
    F = inessential_closure(gen, w, w.support)
    sub, wsub = restriction(gen, w, F)
    found_r = strict_classify(sub).strict_recurrent
    if not irreducible:
        notes.append("recurrent-side certificate inapplicable: not m-irreducible")

    out = np.ones(n)
    out[list(F)] = 0.0
    closure_ok = len(iters) - 1 <= n and cone_membership(out, gen, 0.0).is_excessive

    mod = trivial_modification(gen, w, F)
    version_ok = m_version_residual(gen, mod, w) <= 1e-12
    base = (transient, recurrent, irreducible)
    agree = base == _verdicts(sub, wsub) == _verdicts(mod, w)

    verdicts = {
        "P2.1.14.i": transient,
        "P2.1.14.ii": found_t,
        "P2.1.18.i": bool(recurrent) and bool(irreducible),
        "P2.1.18.ii": found_r,
        "R2.1.15.i": version_ok,
        "R2.1.15.ii": agree,
        "L2.1.15": closure_ok,
    }

    def pattern(p):
        p.equivalent("P2.1.14.i", "P2.1.14.ii")
        p.equivalent("P2.1.18.i", "P2.1.18.ii")
        for key in ("R2.1.15.i", "R2.1.15.ii", "L2.1.15"):
            p.require(verdicts[key], key)

    return build_report(
        "trivial modifications",
        verdicts,
        pattern,
        witnesses={"P2.1.14.ii": tuple(A_t), "P2.1.18.ii": F, "L2.1.15": tuple(tuple(sorted(s)) for s in iters)},
        notes=notes,
    )
