"""Invariant probabilities, the set of invariant densities w.r.t. m, and extremality of m."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .classification import invariant_function_space, invariant_partition, is_m_irreducible, is_m_recurrent
from .errors import NotProbability
from .potential import RECURRENT, class_decomposition
from .report import build_report
from .resolvent import _make_generator, _resolvent, compressed

PROB_TOL = 1e-9


@dataclass(frozen=True)
class InvariantMeasureSet:
    extreme_points: tuple   # probability row vectors of length n
    classes: tuple          # the recurrent class carrying each extreme point

    @property
    def cone_dimension(self):
        return len(self.extreme_points)


def stationary_distribution(block):
    """Unique probability ``pi`` with ``pi^T block = 0`` for an irreducible conservative block."""
    ns = null_space(np.asarray(block).T)
    pi = ns[:, 0]
    pi = np.abs(pi) / np.abs(pi).sum()
    return pi


def invariant_probabilities(gen):
    """Extreme points of the invariant probabilities: one per conservative recurrent class."""
    dec = class_decomposition(gen)
    points, classes = [], []
    for c, t in zip(dec.classes, dec.class_type):
        if t != RECURRENT:
            continue
        mu = np.zeros(gen.n)
        mu[list(c)] = stationary_distribution(gen.L[np.ix_(c, c)])
        mu.setflags(write=False)
        points.append(mu)
        classes.append(tuple(c))
    return InvariantMeasureSet(extreme_points=tuple(points), classes=tuple(classes))


def _is_invariant_density(Lh, us, tol=1e-9):
    """``u`` constant across every positive rate of the support block."""
    i, j = np.nonzero(Lh > 0)
    off = i != j
    scale = max(1.0, float(np.abs(us).max(initial=0.0)))
    return bool(np.all(np.abs(us[i[off]] - us[j[off]]) <= tol * scale))


@dataclass(frozen=True)
class GmDescription:
    support: tuple
    density_basis: np.ndarray   # columns on the support: indicators of invariant atoms
    fixed_basis: np.ndarray     # columns on the support: nonnegative fixed vectors of alpha U_alpha
    masses: tuple               # m(u) for each density basis column
    iac_inside: bool            # invariant probabilities absolutely continuous w.r.t. m lie in the set
    equals_iac: object          # True/False when m-recurrent, None otherwise

    @property
    def dim(self):
        return self.density_basis.shape[1]

    def extreme_measures(self, m):
        """The extreme members ``1_A m / m(A)`` as full-length vectors."""
        out = []
        idx = np.asarray(self.support)
        for col, mass in zip(self.density_basis.T, self.masses):
            mu = np.zeros(m.size)
            mu[idx] = col * m[idx] / mass
            out.append(mu)
        return out


def _probability(w):
    return w if abs(w.mass - 1.0) <= PROB_TOL else w.normalized()


def gm_set(gen, w, recurrent=None):
    """Describe the convex set of probabilities ``u m`` with ``u`` U-invariant."""
    w = _probability(w)
    Lh, mh, idx = compressed(gen, w)
    pos = {int(i): k for k, i in enumerate(idx)}
    atoms = invariant_partition(gen, w)
    D = np.zeros((idx.size, len(atoms)))
    for a, atom in enumerate(atoms):
        D[[pos[i] for i in atom], a] = 1.0
    masses = tuple(float(mh @ D[:, a]) for a in range(D.shape[1]))

    dec = class_decomposition(_make_generator(Lh))
    rec = [c for c, t in zip(dec.classes, dec.class_type) if t == RECURRENT]
    F = np.zeros((idx.size, len(rec)))
    for a, c in enumerate(rec):
        F[list(c), a] = 1.0

    S = set(pos)
    iac = all(_is_invariant_density(Lh, (mu[idx] / mh))
              for mu in invariant_probabilities(gen).extreme_points
              if set(np.flatnonzero(mu > 0)) <= S)
    if recurrent is None:
        recurrent = is_m_recurrent(gen, w).verdict
    equals = None
    if recurrent:
        equals = all(np.allclose((D[:, a] * mh) @ Lh, 0.0, atol=1e-10) for a in range(D.shape[1]))
    return GmDescription(support=tuple(int(i) for i in idx), density_basis=D, fixed_basis=F,
                         masses=masses, iac_inside=iac, equals_iac=equals)


def is_member(gen, w, mu, tol=1e-9):
    """Whether the probability ``mu`` belongs to the set of invariant densities w.r.t. ``m``."""
    mu = np.asarray(mu, dtype=float)
    idx = w.idx
    off = np.setdiff1d(np.arange(gen.n), idx)
    if np.any(mu < -tol) or abs(mu.sum() - 1.0) > tol or np.any(np.abs(mu[off]) > tol):
        return False
    Lh, mh, _ = compressed(gen, w)
    return _is_invariant_density(Lh, mu[idx] / mh, tol)


def decomposition_witness(gen, w, u):
    """Split ``m`` along a non-constant invariant density ``u`` as in the extremality argument.

    Returns ``(alpha, mu1, mu2)`` with ``m = alpha mu1 + (1 - alpha) mu2``,
    or ``None`` when ``u m = m``.
    """
    w = _probability(w)
    m = w.m
    u = np.asarray(u, dtype=float)
    low = np.minimum(u, 1.0)
    alpha = float(low @ m)
    if alpha >= 1.0 - 1e-12 or alpha <= 1e-12:
        return None
    mu1 = low * m / alpha
    mu2 = (1.0 - low) * m / (1.0 - alpha)
    return alpha, mu1, mu2


def _abel_limit(L, f, alphas=(1e-5, 1e-6)):
    a1, a2 = alphas
    v1 = a1 * _resolvent(L, a1) @ f
    v2 = a2 * _resolvent(L, a2) @ f
    r = a1 / a2
    return (r * v2 - v1) / (r - 1.0)


def singularity_check(gen, tol=1e-6):
    """Pairwise checks for distinct extreme invariant probabilities.

    For each pair ``(mu, nu)`` with ``A = support(mu)`` the sets where the
    Abel limit of ``alpha U_alpha 1_A`` equals ``mu(A)`` and ``nu(A)`` must
    be disjoint and carry full mass; supports must be disjoint.
    """
    ims = invariant_probabilities(gen)
    pts = ims.extreme_points
    ok = True
    for a in range(len(pts)):
        for b in range(len(pts)):
            if a == b:
                continue
            mu, nu = pts[a], pts[b]
            if np.any((mu > 0) & (nu > 0)):
                ok = False
                continue
            A = (mu > 0).astype(float)
            lim = _abel_limit(gen.L, A)
            g1 = np.abs(lim - mu @ A) <= tol
            g2 = np.abs(lim - nu @ A) <= tol
            if np.any(g1 & g2) or abs(mu[g1].sum() - 1) > tol or abs(nu[g2].sum() - 1) > tol:
                ok = False
    return ok


def extremality_report(gen, w, irreducible=None, recurrent=None):
    """Irreducibility versus extremality of ``m`` among invariant densities and invariant measures."""
    if abs(w.mass - 1.0) > PROB_TOL:
        raise NotProbability(f"m has total mass {w.mass}, expected 1")
    Lh, mh, idx = compressed(gen, w)
    if irreducible is None:
        irreducible = is_m_irreducible(gen, w)[0]
    if recurrent is None:
        recurrent = is_m_recurrent(gen, w).verdict

    # ii) the invariant functions are the constants
    only_m = invariant_function_space(gen, w).shape[1] == 1

    # iii) no decomposition m = a mu1 + (1 - a) mu2 inside the set
    extremal, witness = True, None
    for atom in invariant_partition(gen, w):
        u = np.zeros(gen.n)
        u[list(atom)] = 1.0 / float(w.m[list(atom)].sum())
        split = decomposition_witness(gen, w, u)
        if split is None:
            continue
        alpha, mu1, mu2 = split
        if is_member(gen, w, mu1) and is_member(gen, w, mu2) and np.allclose(alpha * mu1 + (1 - alpha) * mu2, w.m):
            extremal, witness = False, split
            break

    ims = invariant_probabilities(gen)
    in_I = bool(np.allclose(w.m @ gen.L, 0.0, atol=1e-10))
    extreme_in_I = in_I and any(np.allclose(mu, w.m, atol=1e-9) for mu in ims.extreme_points)

    sym = bool(np.allclose(mh[:, None] * Lh, (mh[:, None] * Lh).T, atol=1e-12))
    gm = gm_set(gen, w, recurrent=recurrent)
    sub_inv = all(np.all((gm.density_basis[:, a] * mh) @ Lh <= 1e-10) for a in range(gm.dim))

    verdicts = {
        "T2.26.i": irreducible,
        "T2.26.ii": only_m,
        "T2.26.iii": extremal,
        "T2.26.iv": extreme_in_I,
        "R2.22.i": sub_inv,
        "R2.22.iii": (bool(recurrent) == in_I),
        "R2.22.iv": gm.iac_inside and (gm.equals_iac is not False),
        "P3.8": singularity_check(gen),
    }

    def pattern(p):
        p.implies("T2.26.i", "T2.26.ii")
        p.equivalent("T2.26.ii", "T2.26.iii")
        if sym:
            p.equivalent("T2.26.i", "T2.26.ii", "T2.26.iii")
        if recurrent:
            p.equivalent("T2.26.i", "T2.26.ii", "T2.26.iii", "T2.26.iv")
        for key in ("R2.22.i", "R2.22.iii", "R2.22.iv", "P3.8"):
            p.require(verdicts[key], key)

    witnesses = {"extreme_points": ims.extreme_points}
    if witness is not None:
        witnesses["T2.26.iii"] = witness
    notes = ["m-symmetric"] if sym else []
    return build_report("extremality", verdicts, pattern, witnesses=witnesses, notes=notes)
