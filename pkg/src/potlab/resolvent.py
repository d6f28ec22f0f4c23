"""Sub-Markovian generators, their resolvents, and weak duals.

A generator ``L`` has nonnegative off-diagonal rates and nonpositive row
sums; its resolvent is ``U_alpha = (alpha I - L)^{-1}``.  A nonnegative
weight vector ``m`` with ``m^T L <= 0`` is sub-invariant and fixes the
"almost everywhere" classes: two vectors are identified when they agree on
``support(m)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyMatrix,
    InvalidMeasure,
    NegativeOffDiagonal,
    NotSquare,
    NotSubInvariant,
    NotSupermedianModM,
    PositiveRowSum,
    SingularSystem,
)

ATOL = 1e-12
RTOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Generator:
    L: np.ndarray
    labels: tuple

    @property
    def n(self):
        return self.L.shape[0]

    @property
    def killing(self):
        """Killing rate per state, ``-(L 1)``."""
        return -self.L.sum(axis=1)

    @property
    def scale(self):
        return max(1.0, float(np.abs(self.L).max()))

    def is_conservative(self, tol=ATOL):
        return bool(np.all(np.abs(self.L.sum(axis=1)) <= tol * self.scale))


def _make_generator(L, labels=None):
    L = _frozen(L)
    if labels is None:
        labels = tuple(str(i + 1) for i in range(L.shape[0]))
    return Generator(L=L, labels=tuple(labels))


def validate_generator(raw, labels=None, tol=ATOL):
    """Check the sub-Markov constraints and return a :class:`Generator`.

    Raises the first violated constraint: :class:`EmptyMatrix`,
    :class:`NegativeOffDiagonal` (row-major order) or :class:`PositiveRowSum`.

    >>> validate_generator([[-1, 1], [1, -1]]).n
    2
    """
    L = np.asarray(raw, dtype=float)
    if L.size == 0:
        raise EmptyMatrix()
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise NotSquare(L.shape)
    if not np.all(np.isfinite(L)):
        raise DimensionMismatch("generator entries must be finite")
    n = L.shape[0]
    if labels is not None and len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for {n} states")
    scale = max(1.0, float(np.abs(L).max()))
    for i in range(n):
        for j in range(n):
            if i != j and L[i, j] < -tol * scale:
                raise NegativeOffDiagonal(i, j, float(L[i, j]))
        s = L[i].sum()
        if s > tol * scale:
            raise PositiveRowSum(i, float(s))
    # clip round-off so downstream graph code sees exact zeros
    L = L.copy()
    off = ~np.eye(n, dtype=bool)
    L[off & (L < 0)] = 0.0
    return _make_generator(L, labels)


@dataclass(frozen=True)
class WeightedSpace:
    m: np.ndarray
    support: tuple = field(default=())

    @property
    def mass(self):
        return float(self.m.sum())

    @property
    def idx(self):
        return np.asarray(self.support, dtype=int)

    def normalized(self):
        return WeightedSpace(m=_frozen(self.m / self.mass), support=self.support)


def weighted_space(gen, m, tol=ATOL):
    """Validate ``m`` against ``gen`` (nonnegative, nonzero, sub-invariant)."""
    m = np.asarray(m, dtype=float)
    if m.shape != (gen.n,):
        raise DimensionMismatch(f"measure has shape {m.shape}, expected ({gen.n},)")
    if not np.all(np.isfinite(m)):
        raise InvalidMeasure("measure entries must be finite")
    if np.any(m < 0):
        raise InvalidMeasure(f"negative entry at index {int(np.argmax(m < 0))}")
    if not np.any(m > 0):
        raise InvalidMeasure("measure is identically zero")
    flux = m @ gen.L
    bound = tol * gen.scale * max(1.0, float(m.max()))
    bad = np.flatnonzero(flux > bound)
    if bad.size:
        raise NotSubInvariant(int(bad[0]), float(flux[bad[0]]))
    support = tuple(int(i) for i in np.flatnonzero(m > 0))
    return WeightedSpace(m=_frozen(m), support=support)


def compressed(gen, w):
    """Generator block, weights and index array on ``support(m)``.

    The support of a sub-invariant measure is closed (no positive rate
    leaves it), so the block is itself a sub-Markovian generator whose
    resolvent is the compression of ``U_alpha``.
    """
    idx = w.idx
    return gen.L[np.ix_(idx, idx)], w.m[idx], idx


@dataclass(frozen=True)
class ResolventMatrix:
    alpha: float
    M: np.ndarray


def _resolvent(L, alpha):
    n = L.shape[0]
    A = alpha * np.eye(n) - L
    try:
        return np.linalg.solve(A, np.eye(n))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - impossible for alpha > 0
        raise SingularSystem(str(exc)) from exc


def resolvent_at(gen, alpha):
    """``U_alpha = (alpha I - L)^{-1}`` by a dense solve."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return ResolventMatrix(alpha=float(alpha), M=_frozen(_resolvent(gen.L, alpha)))


def resolvent_identity_residual(gen, alpha, beta):
    """``max |U_a - U_b - (b - a) U_a U_b|``."""
    Ua, Ub = _resolvent(gen.L, alpha), _resolvent(gen.L, beta)
    return float(np.abs(Ua - Ub - (beta - alpha) * Ua @ Ub).max())


def _adjoint_matrix(L, m, idx):
    n = L.shape[0]
    Ls = -np.eye(n)
    Lhat = L[np.ix_(idx, idx)]
    mh = m[idx]
    Ls[np.ix_(idx, idx)] = (Lhat.T * mh[None, :]) / mh[:, None]
    return Ls


def adjoint_generator(gen, w):
    """Weak dual of ``gen`` with respect to ``w``.

    On the support the adjoint is ``D^{-1} L^T D`` with ``D = diag(m)``;
    rows off the support are pure killing at rate 1 (the adjoint is only
    determined m-a.e., this picks one representative).
    """
    Ls = _adjoint_matrix(gen.L, w.m, w.idx)
    return _make_generator(Ls, gen.labels)


def duality_residual(gen, gen_star, w, alpha, f, g):
    """``|sum f U_a g m - sum g U*_a f m|``."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (gen.n,) or g.shape != (gen.n,) or gen_star.n != gen.n:
        raise DimensionMismatch("f, g and both generators must share the state space")
    lhs = np.sum(f * (_resolvent(gen.L, alpha) @ g) * w.m)
    rhs = np.sum(g * (_resolvent(gen_star.L, alpha) @ f) * w.m)
    return float(abs(lhs - rhs))


@dataclass(frozen=True)
class ConeVerdict:
    is_supermedian: bool
    is_excessive: bool
    order: float
    note: str = "finite v: excessive coincides with supermedian"


def _slack(L, v, tol):
    return tol * max(1.0, float(np.abs(v).max(initial=0.0))) * max(1.0, float(np.abs(L).max(initial=0.0)))


def cone_membership(v, gen, beta=0.0, tol=ATOL):
    """Decide whether ``v`` is ``beta``-order supermedian / excessive.

    On a finite space ``alpha U_{alpha+beta} v <= v`` for every alpha is
    the same as ``v >= 0`` and ``(beta I - L) v >= 0``.  For finite ``v``
    the excessive limit ``alpha U_{alpha+beta} v -> v`` holds automatically.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (gen.n,):
        raise DimensionMismatch(f"vector has shape {v.shape}, expected ({gen.n},)")
    if beta < 0:
        raise ValueError("order must be >= 0")
    s = _slack(gen.L, v, tol) * max(1.0, beta)
    ok = bool(np.all(v >= -s) and np.all(beta * v - gen.L @ v >= -s))
    return ConeVerdict(is_supermedian=ok, is_excessive=ok, order=float(beta))


def excessive_regularize(v, gen, w, tol=1e-10):
    """Excessive function agreeing with ``v`` on the support of ``m``.

    Requires ``v >= 0`` and ``(-L v) >= 0`` on the support.  The result is
    the smallest excessive majorant of ``v 1_support``: it equals ``v`` on
    the support and is bounded by ``max(v)``.
    """
    from .potential import reduced_function

    v = np.asarray(v, dtype=float)
    if v.shape != (gen.n,):
        raise DimensionMismatch(f"vector has shape {v.shape}, expected ({gen.n},)")
    Lh, _, idx = compressed(gen, w)
    vs = v[idx]
    s = _slack(Lh, vs, tol)
    neg = np.flatnonzero(vs < -s)
    if neg.size:
        raise NotSupermedianModM(int(idx[neg[0]]), float(vs[neg[0]]))
    drift = -Lh @ vs
    bad = np.flatnonzero(drift < -s)
    if bad.size:
        raise NotSupermedianModM(int(idx[bad[0]]), float(drift[bad[0]]))
    f = np.zeros(gen.n)
    f[idx] = np.maximum(vs, 0.0)
    out = reduced_function(gen, f, 0.0)
    out[idx] = f[idx]
    return out
