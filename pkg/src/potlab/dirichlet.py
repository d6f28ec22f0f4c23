"""Finite Dirichlet forms ``E(u, v) = -(L u, v)_m`` on the support of m."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, null_space

from .classification import invariant_function_test, is_m_irreducible, is_m_recurrent
from .ergodic import ergodic_projection, fixed_space, max_angle, mean_constant
from .errors import ComparisonFails, NotFiniteMass
from .report import build_report
from .resolvent import _make_generator, _resolvent, compressed, weighted_space

ZERO_RTOL = 1e-10


def _null(M):
    return null_space(M, rcond=ZERO_RTOL * max(1.0, float(np.abs(M).max(initial=0.0))))


@dataclass(frozen=True)
class FormDescriptor:
    E_matrix: np.ndarray    # E(u, v) = u @ E_matrix @ v for vectors on the support
    sym: np.ndarray
    antisym: np.ndarray
    sector_k: float
    m: np.ndarray           # weights on the support
    support: tuple
    witnesses: dict = field(default_factory=dict)
    duality_residual: float = 0.0

    def energy(self, u, v=None):
        v = u if v is None else v
        return float(np.asarray(u) @ self.E_matrix @ np.asarray(v))


def _whitener(S):
    lam, V = np.linalg.eigh(S)
    keep = lam > ZERO_RTOL * max(1.0, float(np.abs(lam).max(initial=0.0)))
    return V[:, keep] / np.sqrt(lam[keep]), V[:, ~keep]


def sector_constant(sym, antisym):
    """Smallest ``k`` with ``|E(u,v)| <= k E(u,u)^1/2 E(v,v)^1/2``, plus a pair attaining it."""
    W, _ = _whitener(sym)
    if W.shape[1] == 0:
        return 1.0, None
    B = W.T @ antisym @ W
    U, s, Vt = np.linalg.svd(np.eye(B.shape[0]) + B)
    k = float(s[0])
    return max(1.0, k), (W @ U[:, 0], W @ Vt[0])


def build_form(gen, w):
    Lh, mh, idx = compressed(gen, w)
    Q = -(Lh.T * mh[None, :])
    S = 0.5 * (Q + Q.T)
    A = 0.5 * (Q - Q.T)
    k, pair = sector_constant(S, A)
    res = 0.0
    D = np.diag(mh)
    for a in (0.5, 1.0, 2.0):
        Ua = _resolvent(Lh, a)
        res = max(res, float(np.abs(Ua.T @ (Q + a * D) - D).max()))
    wit = {"sector": pair} if pair is not None else {}
    return FormDescriptor(E_matrix=Q, sym=S, antisym=A, sector_k=k, m=mh.copy(),
                          support=tuple(int(i) for i in idx), witnesses=wit, duality_residual=res)


@dataclass(frozen=True)
class ZeroEnergy:
    basis: np.ndarray
    angles: dict
    agree: bool


def zero_energy_space(form, gen, w, tol=1e-9):
    """``{E(u,u) = 0}``, ``Ker L`` and the fixed space of ``alpha U_alpha``, compared."""
    Lh, mh, _ = compressed(gen, w)
    Z = _null(form.sym)
    K = _null(Lh)
    F = fixed_space(Lh, 1.0)
    angles = {"kernel": max_angle(Z, K, mh), "fixed": max_angle(Z, F, mh)}
    return ZeroEnergy(basis=Z, angles=angles, agree=max(angles.values()) <= tol)


def derivation_test(gen, w, u):
    """Invariance of ``u`` against the derivation and form-symmetry properties of multiplication by ``u``."""
    Lh, mh, idx = compressed(gen, w)
    u = np.asarray(u, dtype=float)
    us = u[idx] if u.shape == (gen.n,) else u
    form = build_form(gen, w)
    Q = form.E_matrix
    scale = max(1.0, float(np.abs(us).max(initial=0.0))) * max(1.0, float(np.abs(Lh).max(initial=0.0)))
    verdicts = {
        "P5.2.i": invariant_function_test(gen, w, u if u.shape == (gen.n,) else _embed(us, idx, gen.n))["T2.19.iii"],
        "P5.2.ii": bool(np.abs(Lh * us[None, :] - us[:, None] * Lh).max() <= 1e-9 * scale),
        "P5.2.iii": bool(np.abs(us[:, None] * Q - Q * us[None, :]).max() <= 1e-9 * scale),
    }
    return build_report("derivation property", verdicts, lambda p: p.equivalent(*verdicts))


def _embed(x, idx, n):
    out = np.zeros(n)
    out[idx] = x
    return out


def symmetric_part_generator(gen, w):
    """Generator ``(L + L*) / 2`` of the symmetric part, on the support, with its weights."""
    Lh, mh, idx = compressed(gen, w)
    Ls = (Lh.T * mh[None, :]) / mh[:, None]
    G = _make_generator(0.5 * (Lh + Ls), [gen.labels[i] for i in idx])
    return G, weighted_space(G, mh)


def derivation_space(Lh):
    """All ``u`` with ``L(u v) = u L v`` for every ``v``: constancy along positive rates."""
    k = Lh.shape[0]
    rows = []
    for i, j in zip(*np.nonzero(Lh)):
        if i != j:
            r = np.zeros(k)
            r[i], r[j] = Lh[i, j], -Lh[i, j]
            rows.append(r)
    return np.eye(k) if not rows else _null(np.array(rows))


def comparison_constants(form, other, C=None, C_prime=None, tol=1e-9):
    """Constants ``0 < C <= C'`` with ``C E <= E' <= C' E`` on the diagonal.

    When ``C`` and ``C'`` are given they are verified, otherwise the
    tightest pair is computed from the generalized eigenvalues on the
    complement of ``Ker`` of the symmetric part.  Raises
    :class:`ComparisonFails` when no such pair exists or the given one fails.
    """
    S, S2 = form.sym, other.sym
    if S.shape != S2.shape:
        raise ComparisonFails("forms live on different spaces")
    scale = max(1.0, float(np.abs(S).max()), float(np.abs(S2).max()))
    if C is not None:
        if C_prime is None or not 0 < C <= C_prime:
            raise ComparisonFails("need 0 < C <= C'")
        lo = np.linalg.eigvalsh(S2 - C * S).min()
        hi = np.linalg.eigvalsh(C_prime * S - S2).min()
        if lo < -tol * scale or hi < -tol * scale:
            raise ComparisonFails(f"C = {C}, C' = {C_prime} do not bound the forms")
        return float(C), float(C_prime)
    W, N = _whitener(S)
    if N.shape[1] and np.abs(S2 @ N).max() > tol * scale:
        raise ComparisonFails("second form has energy on the zero-energy space of the first")
    if W.shape[1] == 0:
        return 1.0, 1.0
    lam = eigh(W.T @ S2 @ W, eigvals_only=True)
    if lam.min() <= tol:
        raise ComparisonFails("second form is degenerate where the first is not")
    return float(lam.min()), float(lam.max())


def form_equivalence_report(gen, w, other_form=None, C=None, C_prime=None):
    """Recurrence and irreducibility of the form against its symmetric part, and comparison of forms."""
    if not np.isfinite(w.mass):
        raise NotFiniteMass("finite total mass required")
    w = w.normalized()
    Lh, mh, idx = compressed(gen, w)
    form = build_form(gen, w)
    gt, wt = symmetric_part_generator(gen, w)
    one = np.ones(idx.size)
    tol = 1e-9 * max(1.0, float(np.abs(Lh).max(initial=0.0)))

    rec = is_m_recurrent(gen, w).verdict
    verdicts = {
        "C5.3.i.1": rec,
        "C5.3.i.2": is_m_recurrent(gt, wt).verdict,
        "C5.3.i.3": abs(form.energy(one)) <= tol,
    }
    notes = []
    if rec:
        ze = zero_energy_space(form, gen, w)
        Z = ze.basis
        K = _null(Lh)
        const = one[:, None]
        conv = True
        for i in range(idx.size):
            e = np.zeros(idx.size)
            e[i] = 1.0
            P = ergodic_projection(gen, w, e, check=False)
            conv &= bool(np.abs(P - mean_constant(w, e)).max() <= 1e-9)
        verdicts.update({
            "C5.3.ii.1": is_m_irreducible(gen, w)[0],
            "C5.3.ii.2": is_m_irreducible(gt, wt)[0],
            "C5.3.ii.3": Z.shape[1] == 1 and max_angle(Z, const) <= 1e-9,
            "C5.3.ii.4": K.shape[1] == 1 and max_angle(K, const) <= 1e-9,
            "C5.3.ii.5": derivation_space(Lh).shape[1] == 1,
            "C5.3.ii.6": conv,
        })
    else:
        notes.append("not recurrent: irreducibility branch skipped")

    witnesses = {"sector_k": form.sector_k}
    if other_form is not None:
        c, c2 = comparison_constants(form, other_form, C, C_prime)
        Z1 = _null(form.sym)
        Z2 = _null(other_form.sym)
        same = max_angle(Z1, Z2, mh) <= 1e-9
        verdicts["C5.8.zero_energy"] = same
        verdicts["C5.8.irreducible"] = (Z1.shape[1] == 1) == (Z2.shape[1] == 1)
        witnesses["C5.8"] = (c, c2)

    def pattern(p):
        p.equivalent("C5.3.i.1", "C5.3.i.2", "C5.3.i.3")
        if rec:
            p.equivalent(*[k for k in verdicts if k.startswith("C5.3.ii")])
        for key in ("C5.8.zero_energy", "C5.8.irreducible"):
            if key in verdicts:
                p.require(verdicts[key], key)

    return build_report("form recurrence and comparison", verdicts, pattern, witnesses=witnesses, notes=notes)
