"""Extended-precision arithmetic, dense SPD linear algebra and quadrature.

Real numbers are ``mpmath.mpf`` values; the working precision is the
precision of the active ``mpmath.mp`` context.  Every public entry point
of the package wraps its body in :func:`working_precision` so that callers
only ever choose a bit count.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import mpmath
from mpmath import mp, mpf

from .errors import NotPositiveDefinite, PrecisionExhausted

XReal = mpf

DEFAULT_PREC = 256
MIN_PREC = 64
MAX_PREC = 4096


def default_prec() -> int:
    """Default working precision in bits (``JPVI_PREC_BITS`` overrides 256)."""
    raw = os.environ.get("JPVI_PREC_BITS")
    if not raw:
        return DEFAULT_PREC
    bits = int(raw)
    if bits < MIN_PREC:
        raise ValueError(f"JPVI_PREC_BITS must be >= {MIN_PREC}, got {bits}")
    return bits


@contextmanager
def working_precision(prec: int | None = None):
    """Run a block at ``prec`` bits; ``None`` means :func:`default_prec`."""
    bits = default_prec() if prec is None else int(prec)
    if bits < MIN_PREC:
        raise ValueError(f"precision must be >= {MIN_PREC} bits, got {bits}")
    with mp.workprec(bits):
        yield bits


def to_x(value) -> mpf:
    """Convert to ``mpf`` at the current precision.

    Strings are parsed as decimals directly, so ``"0.1"`` means 1/10 to the
    working precision rather than the nearest double.
    """
    if isinstance(value, str):
        return mpf(value.strip())
    return mpf(value)


def precision_ladder(prec: int | None = None) -> list[int]:
    bits = default_prec() if prec is None else int(prec)
    ladder = [bits]
    while ladder[-1] * 2 <= MAX_PREC:
        ladder.append(ladder[-1] * 2)
    return ladder


def with_escalation(fn: Callable, *args, prec: int | None = None, **kwargs):
    """Call ``fn`` at ``prec`` bits, doubling on :class:`PrecisionExhausted`.

    Gives up after :data:`MAX_PREC` and re-raises the last failure.
    """
    last: PrecisionExhausted | None = None
    for bits in precision_ladder(prec):
        with working_precision(bits):
            try:
                return fn(*args, **kwargs)
            except PrecisionExhausted as exc:
                last = exc
    assert last is not None
    raise PrecisionExhausted(f"precision exhausted at {MAX_PREC} bits: {last}", last.index)


# ---------------------------------------------------------------------------
# dense linear algebra


def _rows(M) -> list[list[mpf]]:
    if isinstance(M, mpmath.matrix):
        return [[M[i, j] for j in range(M.cols)] for i in range(M.rows)]
    return [[mpf(v) for v in row] for row in M]


def hankel_matrix(seq: Sequence, n: int, offset: int = 0) -> mpmath.matrix:
    """``n x n`` matrix with entries ``seq[i + j + offset]``.

    Entries (i, j) and (j, i) are the same object, so the result is exactly
    symmetric.
    """
    if len(seq) < 2 * n - 1 + offset:
        raise ValueError(f"need {2 * n - 1 + offset} sequence terms, got {len(seq)}")
    M = mpmath.matrix(n, n)
    for i in range(n):
        for j in range(n):
            M[i, j] = seq[i + j + offset]
    return M


@dataclass(frozen=True)
class Factorization:
    """Root-free Cholesky factorization ``M = L diag(d) L^T``.

    ``L`` is unit lower triangular and stored as a tuple of rows.
    """

    L: tuple[tuple[mpf, ...], ...]
    d: tuple[mpf, ...]

    @property
    def size(self) -> int:
        return len(self.d)

    @property
    def sign(self) -> int:
        neg = sum(1 for v in self.d if v < 0)
        return -1 if neg % 2 else 1

    @property
    def log_det(self) -> mpf:
        """``ln |det M|``."""
        return mp.fsum(mp.log(abs(v)) for v in self.d)

    @property
    def det(self) -> mpf:
        return self.sign * mp.exp(self.log_det)

    def solve(self, b: Sequence) -> list[mpf]:
        n = self.size
        L = self.L
        y = [mpf(0)] * n
        for i in range(n):
            y[i] = mpf(b[i]) - mp.fdot(L[i][:i], y[:i])
        for i in range(n):
            y[i] = y[i] / self.d[i]
        x = [mpf(0)] * n
        for i in reversed(range(n)):
            x[i] = y[i] - mp.fdot([L[k][i] for k in range(i + 1, n)], x[i + 1:])
        return x

    def solve_matrix(self, B) -> list[list[mpf]]:
        """``M^{-1} B`` as a list of rows."""
        rows = _rows(B)
        cols = [self.solve([r[j] for r in rows]) for j in range(len(rows[0]))]
        return [[cols[j][i] for j in range(len(cols))] for i in range(self.size)]

    def inverse_lower(self) -> list[list[mpf]]:
        """``L^{-1}``, unit lower triangular, by forward substitution."""
        n = self.size
        L = self.L
        C = [[mpf(0)] * n for _ in range(n)]
        for i in range(n):
            C[i][i] = mpf(1)
            for j in range(i):
                C[i][j] = -mp.fdot(L[i][j:i], [C[k][j] for k in range(j, i)])
        return C


def factor_spd(M, min_bits: int | None = None) -> Factorization:
    """LDL^T factorization of a symmetric, intended positive definite matrix.

    A pivot that has lost more than half of the working precision to
    cancellation raises :class:`PrecisionExhausted` (retry with more bits);
    a clearly negative or zero pivot raises :class:`NotPositiveDefinite`.
    ``min_bits`` is the number of significant bits every pivot must keep,
    default half the working precision.
    """
    A = _rows(M)
    n = len(A)
    if any(len(r) != n for r in A):
        raise ValueError("matrix must be square")
    keep = mp.prec // 2 if min_bits is None else min_bits
    floor = mpf(2) ** (keep - mp.prec)
    L = [[mpf(0)] * n for _ in range(n)]
    d = [mpf(0)] * n
    for j in range(n):
        terms = [L[j][k] * L[j][k] * d[k] for k in range(j)]
        dj = A[j][j] - mp.fsum(terms)
        scale = max([abs(A[j][j])] + [abs(v) for v in terms])
        if not mp.isfinite(dj):
            raise PrecisionExhausted(f"non-finite pivot at index {j}", j)
        if dj <= 0:
            if scale == 0 or abs(dj) <= floor * scale:
                raise PrecisionExhausted(f"pivot {j} lost to cancellation", j)
            raise NotPositiveDefinite(j, dj)
        if dj < floor * scale:
            raise PrecisionExhausted(f"pivot {j} keeps fewer than {keep} bits", j)
        d[j] = dj
        L[j][j] = mpf(1)
        for i in range(j + 1, n):
            s = A[i][j] - mp.fdot([L[i][k] * d[k] for k in range(j)], L[j][:j])
            L[i][j] = s / dj
    return Factorization(tuple(tuple(r) for r in L), tuple(d))


def _trace_prod(X, Y) -> mpf:
    n = len(X)
    return mp.fsum(X[i][j] * Y[j][i] for i in range(n) for j in range(n))


def _matmul(X, Y):
    n = len(X)
    return [[mp.fdot(X[i], [Y[k][j] for k in range(n)]) for j in range(n)] for i in range(n)]


def logdet_derivatives(M, M1, M2, M3, factor: Factorization | None = None):
    """First three derivatives of ``ln det M(t)`` from entrywise derivatives.

    Uses the trace identities with ``X_k = M^{-1} M_k``::

        d1 = tr X1
        d2 = tr X2 - tr X1^2
        d3 = tr X3 - 3 tr(X2 X1) + 2 tr X1^3
    """
    F = factor_spd(M) if factor is None else factor
    X1 = F.solve_matrix(M1)
    X2 = F.solve_matrix(M2)
    X3 = F.solve_matrix(M3)
    n = F.size
    tr1 = mp.fsum(X1[i][i] for i in range(n))
    tr2 = mp.fsum(X2[i][i] for i in range(n))
    tr3 = mp.fsum(X3[i][i] for i in range(n))
    X1sq = _matmul(X1, X1)
    d1 = tr1
    d2 = tr2 - _trace_prod(X1, X1)
    d3 = tr3 - 3 * _trace_prod(X2, X1) + 2 * _trace_prod(X1sq, X1)
    return d1, d2, d3


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadRule:
    kind: str = "tanh-sinh"
    target_rel_tol: mpf = field(default_factory=lambda: mpf("1e-30"))
    max_levels: int = 10

    def __post_init__(self):
        if self.kind not in ("tanh-sinh", "gauss-legendre"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        if not self.target_rel_tol > 0:
            raise ValueError("target_rel_tol must be positive")
        if self.max_levels < 1:
            raise ValueError("max_levels must be >= 1")


_MP_METHOD = {"tanh-sinh": "tanh-sinh", "gauss-legendre": "gauss-legendre"}


def integrate(
    f: Callable[[mpf], mpf],
    a,
    b,
    rule: QuadRule | None = None,
    points: Iterable = (),
) -> tuple[mpf, bool]:
    """Integrate ``f`` over ``[a, b]``, never straddling any of ``points``.

    Returns ``(value, converged)``.  ``converged`` is False when the error
    estimate after ``max_levels`` refinements still exceeds the target; the
    best value is returned regardless.
    """
    rule = rule or QuadRule()
    a, b = mpf(a), mpf(b)
    cuts = sorted(mpf(p) for p in points if a < mpf(p) < b)
    nodes = [a, *cuts, b]
    total = mpf(0)
    err = mpf(0)
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        if hi == lo:
            continue
        v, e = mp.quad(f, [lo, hi], method=_MP_METHOD[rule.kind], error=True,
                       maxdegree=rule.max_levels)
        total += v
        err += abs(e)
    scale = abs(total)
    converged = err <= rule.target_rel_tol * scale if scale else err <= rule.target_rel_tol
    return total, bool(converged)


@lru_cache(maxsize=64)
def _jacobi_rule_cached(npts: int, a: mpf, b: mpf, prec: int):
    with mp.workprec(prec):
        # mpmath's Jacobi weight is (1-x)^alpha (1+x)^beta on (-1, 1)
        X, W = mp.gauss_quadrature(npts, "jacobi", b, a)
        scale = mpf(2) ** (-(a + b + 1))
        nodes = tuple((1 + x) / 2 for x in X)
        weights = tuple(w * scale for w in W)
    return nodes, weights


def jacobi_rule(npts: int, a=0, b=0) -> tuple[tuple[mpf, ...], tuple[mpf, ...]]:
    """Gauss rule on [0, 1] for the weight ``u^a (1-u)^b``.

    Exact for polynomials of degree < ``2 * npts``.
    """
    if npts < 1:
        raise ValueError("npts must be >= 1")
    return _jacobi_rule_cached(npts, mpf(a), mpf(b), mp.prec)
