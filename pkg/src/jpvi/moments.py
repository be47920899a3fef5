"""Moments of the jump-perturbed Jacobi weight and its Hankel determinant.

The weight is ``x^alpha (1-x)^beta (A + B theta(x - t))`` on [0, 1].  Only
the jump term depends on ``t``, so every ``t``-derivative of a moment has a
closed form and the derivatives of ``ln D_n`` come out of trace identities
instead of finite differences.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from itertools import combinations

from mpmath import mp, mpf

from . import numerics, specfun
from .errors import DomainError, NotConverged

DEBUG = os.environ.get("JPVI_DEBUG", "") not in ("", "0")


@dataclass(frozen=True)
class WeightParams:
    alpha: mpf
    beta: mpf
    A: mpf
    B: mpf

    def __post_init__(self):
        for name in ("alpha", "beta", "A", "B"):
            object.__setattr__(self, name, numerics.to_x(getattr(self, name)))
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"need alpha, beta > 0, got {self.alpha}, {self.beta}")
        if self.A < 0 or self.A + self.B < 0:
            raise DomainError(f"need A >= 0 and A + B >= 0, got A={self.A}, B={self.B}")
        if self.A == 0 and self.B == 0:
            raise DomainError("A and B cannot both vanish")

    @classmethod
    def of(cls, alpha, beta, A=1, B=0) -> "WeightParams":
        return cls(alpha, beta, A, B)

    def scaled(self, c) -> "WeightParams":
        c = numerics.to_x(c)
        return replace(self, A=self.A * c, B=self.B * c)

    def reference(self) -> "WeightParams":
        """The unperturbed weight with unit mass factor, ``A=1, B=0``."""
        return WeightParams(self.alpha, self.beta, 1, 0)

    def w0(self, x) -> mpf:
        x = mpf(x)
        return x ** self.alpha * (1 - x) ** self.beta

    def jump(self, x, t) -> mpf:
        # theta(0) = 1 at the jump point itself
        return self.A + self.B if x >= t else self.A

    def weight(self, x, t) -> mpf:
        return self.w0(x) * self.jump(x, t)


def _check_t(t: mpf, closed: bool = True):
    if closed and not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")


def moment_hypergeometric(k: int, params: WeightParams, t) -> mpf:
    """``mu_k(t)`` from the 2F1 closed form, valid for ``0 < t <= 1``."""
    t = mpf(t)
    if not 0 < t <= 1:
        raise DomainError("the 2F1 form needs 0 < t <= 1")
    a = params.alpha + k
    b = params.beta
    complete = mp.exp(specfun.log_beta(a + 1, b + 1))
    z = 1 - 1 / t
    jump = (1 - t) ** (1 + b) * t ** a * specfun.hyp2f1(-a, 1, 2 + b, z) / (1 + b)
    return params.A * complete + params.B * jump


def moment(k: int, params: WeightParams, t, check: bool | None = None) -> mpf:
    """``mu_k(t) = A B(alpha+k+1, beta+1) + B int_t^1 x^(alpha+k) (1-x)^beta dx``.

    With ``check`` (default: the ``JPVI_DEBUG`` environment flag) the value is
    compared against the 2F1 closed form.
    """
    if k < 0:
        raise DomainError("moment index must be >= 0")
    t = mpf(t)
    _check_t(t)
    a = params.alpha + k + 1
    b = params.beta + 1
    complete = mp.exp(specfun.log_beta(a, b))
    if t == 0:
        value = (params.A + params.B) * complete
    elif t == 1:
        value = params.A * complete
    else:
        value = params.A * complete + params.B * specfun.tail_beta(a, b, t)
    if (DEBUG if check is None else check) and 0 < t < 1:
        other = moment_hypergeometric(k, params, t)
        if abs(other - value) > mpf(2) ** (-mp.prec // 2) * abs(value):
            raise AssertionError(f"moment {k}: tail Beta {value} vs 2F1 {other}")
    return value


def moment_derivatives(k: int, params: WeightParams, t) -> tuple[mpf, mpf, mpf]:
    """First three ``t``-derivatives of ``mu_k``.

    ``mu_k' = -B t^a (1-t)^beta`` with ``a = alpha + k``; the higher ones
    differentiate that product.  At ``t = 0`` a derivative that diverges
    (``t^(a-j)`` with ``a < j``) is returned as ``+-inf``.
    """
    t = mpf(t)
    B, b = params.B, params.beta
    a = params.alpha + k
    if B == 0:
        return mpf(0), mpf(0), mpf(0)
    if t == 0 or t == 1:
        return _edge_derivatives(a, b, B, t)
    u = 1 - t
    d1 = -B * t ** a * u ** b
    d2 = -B * t ** (a - 1) * u ** (b - 1) * (a * u - b * t)
    g = a - (a + b) * t
    d3 = -B * t ** (a - 2) * u ** (b - 2) * (
        (a - 1) * u * g - (b - 1) * t * g - (a + b) * t * u
    )
    return d1, d2, d3


def _edge_derivatives(a, b, B, t):
    # one-sided limits of the closed forms at an endpoint
    out = []
    for order in (1, 2, 3):
        if t == 0:
            e = a - (order - 1)
            lead = {1: mpf(1), 2: a, 3: a * (a - 1)}[order]
        else:
            e = b - (order - 1)
            lead = {1: mpf(1), 2: -b, 3: b * (b - 1)}[order]
        if e > 0 or lead == 0:
            out.append(mpf(0))
        elif e == 0:
            out.append(-B * lead)
        else:
            out.append(-B * lead * mp.inf)
    return tuple(out)


@dataclass(frozen=True)
class MomentTable:
    t: mpf
    params: WeightParams
    mu: tuple[mpf, ...]
    mu1: tuple[mpf, ...]
    mu2: tuple[mpf, ...]
    mu3: tuple[mpf, ...]


def moment_table(n: int, params: WeightParams, t, derivatives: bool = True) -> MomentTable:
    """Moments ``mu_0 .. mu_{2n-2}`` and their first three ``t``-derivatives.

    Each moment is computed on its own (no recurrence in ``k``).
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    t = mpf(t)
    _check_t(t)
    ks = range(2 * n - 1)
    mu = tuple(moment(k, params, t) for k in ks)
    if derivatives:
        ders = [moment_derivatives(k, params, t) for k in ks]
    else:
        ders = [(mpf(0),) * 3 for _ in ks]
    return MomentTable(
        t=t,
        params=params,
        mu=mu,
        mu1=tuple(d[0] for d in ders),
        mu2=tuple(d[1] for d in ders),
        mu3=tuple(d[2] for d in ders),
    )


@dataclass(frozen=True)
class HankelResult:
    n: int
    t: mpf
    log_det: mpf
    d_logdet: tuple[mpf, mpf, mpf]
    H: mpf
    H1: mpf
    H2: mpf

    @property
    def det(self) -> mpf:
        return mp.exp(self.log_det)


def _hankel(n: int, params: WeightParams, t: mpf) -> HankelResult:
    table = moment_table(n, params, t)
    M = numerics.hankel_matrix(table.mu, n)
    F = numerics.factor_spd(M)
    if t == 0:
        # one-sided limits; mu_k'(0) = 0 since alpha > 0, so (ln D)'(0) = 0 and
        # the traces reduce to tr(M^-1 M2), tr(M^-1 M3) when those are finite
        traces = []
        for row in (table.mu2, table.mu3):
            if all(mp.isfinite(v) for v in row):
                X = F.solve_matrix(numerics.hankel_matrix(row, n))
                traces.append(mp.fsum(X[i][i] for i in range(n)))
            else:
                traces.append(mp.nan)
        d = (mpf(0), traces[0], traces[1])
        return HankelResult(n, t, F.log_det, d, mpf(0), mpf(0), -2 * d[1])
    d = numerics.logdet_derivatives(
        M,
        numerics.hankel_matrix(table.mu1, n),
        numerics.hankel_matrix(table.mu2, n),
        numerics.hankel_matrix(table.mu3, n),
        factor=F,
    )
    s = t * (t - 1)
    H = s * d[0]
    H1 = (2 * t - 1) * d[0] + s * d[1]
    H2 = 2 * d[0] + 2 * (2 * t - 1) * d[1] + s * d[2]
    return HankelResult(n, t, F.log_det, tuple(d), H, H1, H2)


def hankel(n: int, params: WeightParams, t, prec: int | None = None) -> HankelResult:
    """Hankel determinant ``D_n(t)``, its log-derivatives, and ``H_n, H_n', H_n''``.

    ``H_n = t(t-1) (ln D_n)'``.  The computation is retried at doubled
    precision when the factorization reports cancellation.
    """
    if n < 1:
        raise DomainError("n must be >= 1")

    def run():
        tt = numerics.to_x(t)
        _check_t(tt)
        if tt == 1:
            raise DomainError("t = 1 is outside the Hankel domain")
        return _hankel(n, params, tt)

    return numerics.with_escalation(run, prec=prec)


def log_det_at(n: int, params: WeightParams, t) -> mpf:
    """``ln D_n(t)`` only, skipping the derivative traces."""
    t = mpf(t)
    table = moment_table(n, params, t, derivatives=False)
    return numerics.factor_spd(numerics.hankel_matrix(table.mu, n)).log_det


# ---------------------------------------------------------------------------
# multiple-integral oracle


def vandermonde_sq_sum(nodes, weights, n: int) -> mpf:
    """``(1/n!) sum over the tensor rule of prod(w) * Vandermonde^2``.

    The summand is symmetric and vanishes on repeated nodes, so only strictly
    increasing index tuples are visited.
    """
    m = len(nodes)
    if n == 1:
        return mp.fsum(weights)
    diff2 = [[(nodes[i] - nodes[j]) ** 2 for j in range(m)] for i in range(m)]
    terms = []
    for idx in combinations(range(m), n):
        p = mpf(1)
        for a_pos in range(n):
            i = idx[a_pos]
            p *= weights[i]
            for j in idx[a_pos + 1:]:
                p *= diff2[i][j]
        terms.append(p)
    return mp.fsum(terms)


def _weighted_rule(params: WeightParams, t: mpf, npts: int):
    """Nodes and full-weight coefficients on [0, 1], split at ``t``.

    On each piece the algebraic endpoint factor is absorbed into a
    Gauss-Jacobi rule; the remaining factor is analytic on the piece.
    """
    al, be = params.alpha, params.beta
    nodes, weights = [], []
    if t == 0 or t == 1:
        c = params.A + params.B if t == 0 else params.A
        if c != 0:
            u, w = numerics.jacobi_rule(npts, al, be)
            nodes += u
            weights += [c * wi for wi in w]
        return nodes, weights
    if params.A != 0:
        # [0, t]: x = t u, weight t^(alpha+1) u^alpha (1 - t u)^beta
        u, w = numerics.jacobi_rule(npts, al, 0)
        for ui, wi in zip(u, w):
            nodes.append(t * ui)
            weights.append(params.A * t ** (al + 1) * wi * (1 - t * ui) ** be)
    if params.A + params.B != 0:
        # [t, 1]: x = t + (1-t) v, weight (1-t)^(beta+1) (1-v)^beta x^alpha
        v, w = numerics.jacobi_rule(npts, 0, be)
        s = 1 - t
        for vi, wi in zip(v, w):
            x = t + s * vi
            nodes.append(x)
            weights.append((params.A + params.B) * s ** (be + 1) * wi * x ** al)
    return nodes, weights


def multiint_oracle(n: int, params: WeightParams, t, npts: int = 24,
                    prec: int | None = 128, tol=None, max_npts: int = 96) -> mpf:
    """``D_n(t)`` as the n-fold integral of the squared Vandermonde, n <= 3.

    Evaluated with a tensor Gauss-Jacobi rule of ``npts`` nodes per piece and
    per axis; the node count grows by half until two successive rules agree
    to ``tol`` (default ``1e-16``).  Past ``max_npts`` it raises
    :class:`NotConverged`.
    """
    if n not in (1, 2, 3):
        raise DomainError("multiint_oracle supports n in {1, 2, 3}")
    with numerics.working_precision(prec):
        tt = numerics.to_x(t)
        _check_t(tt)
        tol = mpf("1e-16") if tol is None else mpf(tol)
        previous = None
        m = npts
        while True:
            nodes, weights = _weighted_rule(params, tt, m)
            value = vandermonde_sq_sum(nodes, weights, n)
            if previous is not None and abs(value - previous) <= tol * abs(value):
                return value
            if m >= max_npts:
                raise NotConverged(f"multiple integral: {previous} vs {value} at {m} nodes", value)
            previous = value
            m = min(max_npts, m + m // 2)
