"""Class structure, the extended potential kernel, and reduced functions."""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import DimensionMismatch, NonNegativeInputRequired
from .resolvent import ATOL

RECURRENT = "recurrent"
TRANSIENT = "transient"


def rate_graph(L):
    """Boolean adjacency of positive off-diagonal rates."""
    A = np.asarray(L) > 0
    np.fill_diagonal(A, False)
    return A


def reachability(L):
    """``R[x, y]`` is True when ``y`` is reachable from ``x`` (``x == y`` included)."""
    A = rate_graph(L)
    if not A.any():
        return np.eye(A.shape[0], dtype=bool)
    d = shortest_path(csr_matrix(A.astype(float)), method="D", unweighted=True)
    return np.isfinite(d)


@dataclass(frozen=True)
class ClassDecomposition:
    classes: tuple          # tuple of tuples of state indices, sorted by smallest member
    class_type: tuple       # RECURRENT / TRANSIENT per class
    condensation: frozenset  # edges (a, b) between class indices
    class_of: tuple         # class index per state

    def recurrent_states(self):
        return sorted(i for c, t in zip(self.classes, self.class_type) if t == RECURRENT for i in c)

    def recurrent_mask(self, n):
        mask = np.zeros(n, dtype=bool)
        mask[self.recurrent_states()] = True
        return mask


def class_decomposition(gen, tol=ATOL):
    """Strongly connected components of the positive-rate graph.

    A class is recurrent when it is closed and conservative.
    """
    A = rate_graph(gen.L)
    n = gen.n
    _, labels = connected_components(csr_matrix(A.astype(float)), directed=True, connection="strong")
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    classes = sorted((tuple(g) for g in groups.values()), key=lambda c: c[0])
    class_of = np.empty(n, dtype=int)
    for k, c in enumerate(classes):
        class_of[list(c)] = k
    edges = set()
    for i, j in zip(*np.nonzero(A)):
        a, b = class_of[i], class_of[j]
        if a != b:
            edges.add((int(a), int(b)))
    rows = gen.L.sum(axis=1)
    scale = gen.scale
    types = []
    for k, c in enumerate(classes):
        closed = not any(a == k for a, _ in edges)
        conservative = bool(np.all(np.abs(rows[list(c)]) <= tol * scale))
        types.append(RECURRENT if closed and conservative else TRANSIENT)
    return ClassDecomposition(
        classes=tuple(classes),
        class_type=tuple(types),
        condensation=frozenset(edges),
        class_of=tuple(int(k) for k in class_of),
    )


@dataclass(frozen=True)
class ExtendedPotential:
    """Initial kernel ``U = sup_alpha U_alpha`` with ``+inf`` entries."""

    U: np.ndarray

    @property
    def infinite(self):
        return np.isinf(self.U)

    def pattern(self):
        """0 for zero, 1 for finite positive, 2 for infinite."""
        P = np.where(self.U > 0, 1, 0)
        P[self.infinite] = 2
        return P

    def apply(self, f):
        """``U f`` for ``f >= 0`` with the convention ``0 * inf = 0``."""
        f = np.asarray(f, dtype=float)
        if np.any(f < 0):
            raise NonNegativeInputRequired("U f is only defined here for f >= 0")
        inf = self.infinite
        fin = np.where(inf, 0.0, self.U) @ f
        hits = (inf & (f > 0)[None, :]).any(axis=1)
        return np.where(hits, np.inf, fin)


def potential_kernel(gen):
    """``U(x, y) = int_0^inf p_t(x, y) dt`` over ``[0, +inf]``.

    Infinite exactly when ``x`` reaches a recurrent ``y``; the finite block
    is ``(-L_TT)^{-1}`` on the transient states ``T``.
    """
    n = gen.n
    dec = class_decomposition(gen)
    rec = dec.recurrent_mask(n)
    R = reachability(gen.L)
    U = np.zeros((n, n))
    T = np.flatnonzero(~rec)
    if T.size:
        block = np.linalg.solve(-gen.L[np.ix_(T, T)], np.eye(T.size))
        U[np.ix_(T, T)] = np.where(R[np.ix_(T, T)], np.maximum(block, 0.0), 0.0)
    U[R & rec[None, :]] = np.inf
    U.setflags(write=False)
    return ExtendedPotential(U=U)


def reduced_function(gen, f, beta=0.0, c=1.0, tol=1e-12, max_iter=5000):
    """Pointwise-smallest ``beta``-supermedian majorant of ``f >= 0``.

    Iterates ``v <- max(f, c U_{beta+c} v)`` upward from ``v = f``; the
    increasing limit is the smallest fixed point, i.e. the reduced function.
    The iterate is then polished by solving ``(beta I - L) v = 0`` exactly on
    the set where ``v > f``.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (gen.n,):
        raise DimensionMismatch(f"f has shape {f.shape}, expected ({gen.n},)")
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise NonNegativeInputRequired("reduced functions need finite f >= 0")
    if beta < 0:
        raise ValueError("order must be >= 0")
    n = gen.n
    top = float(f.max(initial=0.0))
    if top == 0.0:
        return np.zeros(n)
    K = c * np.linalg.solve((beta + c) * np.eye(n) - gen.L, np.eye(n))
    v = f.copy()
    for _ in range(max_iter):
        nxt = np.maximum(f, K @ v)
        done = np.abs(nxt - v).max() < tol * top
        v = nxt
        if done:
            break
    return _polish(gen.L, f, beta, v, top)


def _polish(L, f, beta, v, top):
    n = L.shape[0]
    M = beta * np.eye(n) - L
    slack = 1e-11 * top * max(1.0, float(np.abs(L).max()))
    active = v > f + 1e-9 * top
    seen = set()
    for _ in range(2 * n + 2):
        key = active.tobytes()
        if key in seen:
            break
        seen.add(key)
        w = f.copy()
        C = np.flatnonzero(active)
        N = np.flatnonzero(~active)
        if C.size:
            try:
                w[C] = np.linalg.solve(M[np.ix_(C, C)], -M[np.ix_(C, N)] @ f[N])
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(w)):
                break
        drift = M @ w
        low = w < f - slack
        neg = (drift < -slack) & ~active
        if not low.any() and not neg.any():
            return np.maximum(w, f)
        active = (active & ~low) | neg
    return v
