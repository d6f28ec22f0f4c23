"""Harmonic spaces and Abel ergodic limits ``alpha U_alpha u`` as ``alpha -> 0``.

Vectors here live on ``support(m)``: the compressed space plays the role
of ``L^p(m)``, and the exponent only labels results.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space, orth, subspace_angles

from .potential import RECURRENT, class_decomposition
from .resolvent import _make_generator, _resolvent, compressed

SWEEP_ALPHAS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
NULL_RTOL = 1e-10


def _support_vector(u, gen, idx):
    u = np.asarray(u, dtype=float)
    return u[idx] if u.shape == (gen.n,) else u


def _null(M):
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    return null_space(M, rcond=NULL_RTOL * scale)


def _weighted_orthonormal(B, mh):
    if B.shape[1] == 0:
        return B
    r = np.sqrt(mh)[:, None]
    Q, _ = np.linalg.qr(r * B)
    return Q / r


def max_angle(A, B, mh=None):
    """Largest principal angle between column spaces (m-weighted when ``mh`` is given)."""
    if A.shape[1] != B.shape[1]:
        return np.pi / 2
    if A.shape[1] == 0:
        return 0.0
    if mh is not None:
        r = np.sqrt(mh)[:, None]
        A, B = r * A, r * B
    return float(np.max(subspace_angles(A, B)))


def _compressed_adjoint(Lh, mh):
    return (Lh.T * mh[None, :]) / mh[:, None]


def fixed_space(M, beta):
    """Null space of ``I - beta U_beta`` for the generator block ``M``."""
    k = M.shape[0]
    return _null(np.eye(k) - beta * _resolvent(M, beta))


@dataclass(frozen=True)
class HarmonicBasis:
    basis: np.ndarray               # columns, indexed by the support, m-orthonormal
    beta: float
    support: tuple
    coincides_with_adjoint: bool
    beta_independent: bool
    expected_dim: int
    angles: dict

    @property
    def dim(self):
        return self.basis.shape[1]

    @property
    def dimension_ok(self):
        return self.dim == self.expected_dim


def harmonic_basis(gen, w, beta=1.0, tol=1e-9):
    """Basis of ``Ker(I - beta U_beta)`` on the support, with cross-checks.

    The basis is recomputed at ``2 beta`` and for the adjoint resolvent; the
    largest principal angles are recorded in ``angles``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    Lh, mh, idx = compressed(gen, w)
    Ls = _compressed_adjoint(Lh, mh)
    B = _weighted_orthonormal(fixed_space(Lh, beta), mh)
    B2 = fixed_space(Lh, 2 * beta)
    Bs = fixed_space(Ls, beta)
    angles = {"2beta": max_angle(B, B2, mh), "adjoint": max_angle(B, Bs, mh)}
    dec = class_decomposition(_make_generator(Lh))
    expected = sum(t == RECURRENT for t in dec.class_type)
    return HarmonicBasis(
        basis=B,
        beta=float(beta),
        support=tuple(int(i) for i in idx),
        coincides_with_adjoint=angles["adjoint"] <= tol,
        beta_independent=angles["2beta"] <= tol,
        expected_dim=int(expected),
        angles=angles,
    )


def generator_kernels(gen, w):
    """``(Ker L_hat, Ker L_hat*, largest principal angle)`` on the support."""
    Lh, mh, _ = compressed(gen, w)
    K = _null(Lh)
    Ks = _null(_compressed_adjoint(Lh, mh))
    return K, Ks, max_angle(K, Ks, mh)


def _spectral(Lh, us, beta):
    k = Lh.shape[0]
    A = np.eye(k) - beta * _resolvent(Lh, beta)
    N = _null(A)
    if N.shape[1] == 0:
        return np.zeros(k)
    R = orth(A, rcond=NULL_RTOL * max(1.0, float(np.abs(A).max())))
    coef = np.linalg.solve(np.hstack([N, R]), us)
    return N @ coef[: N.shape[1]]


def abel_means(gen, w, u, alphas=SWEEP_ALPHAS):
    """``alpha U_alpha u`` on the support for each alpha (rows)."""
    Lh, _, idx = compressed(gen, w)
    us = _support_vector(u, gen, idx)
    return np.array([a * _resolvent(Lh, a) @ us for a in alphas])


def _sweep(gen, w, u, alphas=SWEEP_ALPHAS):
    a = sorted(alphas)[:2]
    vals = abel_means(gen, w, u, a)
    # first-order Richardson: a(alpha) = P + C alpha + O(alpha^2)
    r = a[1] / a[0]
    return (r * vals[0] - vals[1]) / (r - 1.0)


def ergodic_projection(gen, w, u, method="spectral", beta=1.0, check=True):
    """Limit of ``alpha U_alpha u`` as ``alpha -> 0``, indexed by the support.

    ``spectral`` projects onto ``Ker(I - beta U_beta)`` along its range;
    ``sweep`` extrapolates the Abel means.  With ``check`` the other method
    is also run and a warning is issued when they differ by more than 1e-6.
    """
    Lh, _, idx = compressed(gen, w)
    us = _support_vector(u, gen, idx)
    if method == "spectral":
        out = _spectral(Lh, us, beta)
        other = _sweep(gen, w, us) if check else out
    elif method == "sweep":
        out = _sweep(gen, w, us)
        other = _spectral(Lh, us, beta) if check else out
    else:
        raise ValueError(f"unknown method {method!r}")
    gap = float(np.abs(out - other).max(initial=0.0))
    if gap > 1e-6 * max(1.0, float(np.abs(us).max(initial=0.0))):
        warnings.warn(f"spectral and sweep ergodic limits differ by {gap:.3g}", RuntimeWarning, stacklevel=2)
    return out


def convergence_profile(gen, w, u, alphas=SWEEP_ALPHAS):
    """Sup-norm errors ``|alpha U_alpha u - P u|`` and the fitted rate constant ``max err/alpha``."""
    P = ergodic_projection(gen, w, u, check=False)
    vals = abel_means(gen, w, u, alphas)
    err = np.abs(vals - P[None, :]).max(axis=1)
    return np.asarray(alphas), err, float(np.max(err / np.asarray(alphas)))


def mean_constant(w, u):
    """``c_u = int u dm / m(E)``."""
    u = np.asarray(u, dtype=float)
    idx = w.idx
    us = u[idx] if u.shape == w.m.shape else u
    return float(us @ w.m[idx] / w.mass)
