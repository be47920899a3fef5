"""Gap probability of the Jacobi ensemble and its behaviour as t -> 1.

With ``A = 0, B = 1`` the ratio ``D_n(t)/D_n(0)`` is the probability that
no eigenvalue falls in ``[0, t]``.  It is computed from Hankel log
determinants and, independently, as ``det(I - G)`` where ``G`` is the Gram
matrix over ``[0, t]`` of the orthonormal functions of the unperturbed
weight.  ``D_n(0)`` has a Barnes G product form, which also gives the
constant in front of ``(1-t)^(n(n+beta))``.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from . import numerics
from .errors import DomainError, NotConverged
from .moments import WeightParams, log_det_at, vandermonde_sq_sum
from .orthopoly import build_system, eval_poly
from .specfun import log_barnes_g, log_beta, log_gamma


def gap_params(alpha, beta) -> WeightParams:
    return WeightParams.of(alpha, beta, 0, 1)


def _check_t(t: mpf):
    if not 0 <= t < 1:
        raise DomainError(f"t must lie in [0, 1), got {t}")


def log_gap_hankel(n: int, alpha, beta, t, prec: int | None = None) -> mpf:
    """``ln D_n(t) - ln D_n(0)``."""
    if n < 1:
        raise DomainError("n must be >= 1")

    def run():
        tt = numerics.to_x(t)
        _check_t(tt)
        if tt == 0:
            return mpf(0)
        p = gap_params(alpha, beta)
        return log_det_at(n, p, tt) - log_det_at(n, p, mpf(0))

    return numerics.with_escalation(run, prec=prec)


def gap_hankel(n: int, alpha, beta, t, prec: int | None = None) -> mpf:
    with numerics.working_precision(prec):
        return mp.exp(log_gap_hankel(n, alpha, beta, t, prec=mp.prec))


def _gram(n: int, p: WeightParams, t: mpf, npts: int):
    """Gram matrix of the orthonormal functions over ``[0, t]``.

    With ``x = t u`` the factor ``u^alpha`` goes into a Gauss-Jacobi rule and
    ``(1 - t u)^beta`` stays in the integrand.
    """
    sys = build_system(n - 1, p, 0, prec=mp.prec) if n > 1 else None
    u, w = numerics.jacobi_rule(npts, p.alpha, 0)
    scale = t ** (p.alpha + 1)
    vals = []
    for ui, wi in zip(u, w):
        x = t * ui
        weight = scale * wi * (1 - x) ** p.beta
        row = [mpf(1) if j == 0 else eval_poly(sys, j, x)[0] for j in range(n)]
        vals.append((weight, row))
    h = sys.h if sys else (mp.exp(log_beta(p.alpha + 1, p.beta + 1)),)
    norm = [1 / mp.sqrt(h[j]) for j in range(n)]
    return [[mp.fsum(wt * row[j] * row[k] for wt, row in vals) * norm[j] * norm[k]
             for k in range(n)] for j in range(n)]


def log_gap_gram(n: int, alpha, beta, t, npts: int = 40, prec: int | None = None) -> mpf:
    """``ln det(I - G(t))``; the rule size doubles until two sizes agree."""
    if n < 1:
        raise DomainError("n must be >= 1")
    with numerics.working_precision(prec):
        tt = numerics.to_x(t)
        _check_t(tt)
        if tt == 0:
            return mpf(0)
        p = gap_params(alpha, beta)
        target = mpf(2) ** (-mp.prec // 2)
        previous = None
        size = npts
        while size <= 16 * npts:
            G = _gram(n, p, tt, size)
            M = [[(1 if j == k else 0) - G[j][k] for k in range(n)] for j in range(n)]
            value = numerics.with_escalation(lambda: numerics.factor_spd(M).log_det, prec=mp.prec)
            if previous is not None and abs(value - previous) <= target * max(1, abs(value)):
                return value
            previous = value
            size *= 2
        raise NotConverged(f"Gram determinant did not settle by {size // 2} nodes", previous)


def gap_gram(n: int, alpha, beta, t, npts: int = 40, prec: int | None = None) -> mpf:
    with numerics.working_precision(prec):
        return mp.exp(log_gap_gram(n, alpha, beta, t, npts, prec=mp.prec))


@dataclass(frozen=True)
class GapResult:
    n: int
    t: mpf
    prob_hankel: mpf
    prob_gram: mpf
    agreement: mpf


def gap(n: int, alpha, beta, t, prec: int | None = None) -> GapResult:
    """Both routes side by side; ``agreement`` is their relative difference."""
    with numerics.working_precision(prec):
        tt = numerics.to_x(t)
        ph = gap_hankel(n, alpha, beta, tt, prec=mp.prec)
        pg = gap_gram(n, alpha, beta, tt, prec=mp.prec)
        return GapResult(n, tt, ph, pg, abs(ph - pg) / max(abs(ph), abs(pg)))


# ---------------------------------------------------------------------------
# Barnes G closed forms


def _log_F(alpha: mpf, beta: mpf) -> mpf:
    s = alpha + beta
    G = log_barnes_g
    return (log_gamma((s + 1) / 2) + 2 * G((s + 1) / 2) + 2 * G(1 + s / 2)
            - G(s + 1) - G(alpha + 1) - G(beta + 1))


def _log_K(alpha: mpf, beta: mpf, n: int) -> mpf:
    s = alpha + beta
    G = log_barnes_g
    return (G(n + 1) + G(n + alpha + 1) + G(n + beta + 1) + G(n + s + 1)
            - 2 * G(n + (s + 1) / 2) - 2 * G(n + 1 + s / 2) - log_gamma(n + (s + 1) / 2))


def dn0_closed_form(n: int, alpha, beta, prec: int | None = None) -> mpf:
    """``ln D_n(0)`` for the weight ``x^alpha (1-x)^beta`` on [0, 1]."""
    if n < 1:
        raise DomainError("n must be >= 1")
    with numerics.working_precision(prec):
        al, be = numerics.to_x(alpha), numerics.to_x(beta)
        if not (al > -1 and be > -1) or al + be <= -1:
            raise DomainError(f"need alpha, beta > -1, got {al}, {be}")
        with mp.extraprec(16):
            value = (-2 * n * (n + al + be) * mp.ln2 + n * mp.log(2 * mp.pi)
                     + _log_F(al, be) + _log_K(al, be, n))
        return +value


@dataclass(frozen=True)
class AsymptoticConstant:
    n: int
    alpha: mpf
    beta: mpf
    exponent: mpf
    C: mpf


def asymptotic_constant(n: int, alpha, beta, prec: int | None = None) -> AsymptoticConstant:
    """Constant and exponent of ``D_n(t)/D_n(0) ~ C (1-t)^exponent`` as t -> 1."""
    if n < 1:
        raise DomainError("n must be >= 1")
    with numerics.working_precision(prec):
        al, be = numerics.to_x(alpha), numerics.to_x(beta)
        with mp.extraprec(16):
            log_c = (2 * n * al * mp.ln2 + _log_F(0, be) + _log_K(0, be, n)
                     - _log_F(al, be) - _log_K(al, be, n))
            C = mp.exp(log_c)
        return AsymptoticConstant(n, al, be, n * (n + be), +C)


def asymptotic_check(n: int, alpha, beta, t_list=("0.9", "0.99", "0.999", "0.9999"),
                     prec: int | None = None) -> tuple[mpf, mpf]:
    """Extrapolate ``gap(t) / (1-t)^(n(n+beta))`` to ``t = 1``.

    The ratio is analytic in ``u = 1 - t``, so Neville interpolation through
    the sampled points evaluated at ``u = 0`` converges.  Returns the
    estimate and its relative deviation from :func:`asymptotic_constant`.
    """
    with numerics.working_precision(prec):
        ts = [numerics.to_x(t) for t in t_list]
        if len(ts) < 2 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise DomainError("t_list must increase and hold at least two points")
        be = numerics.to_x(beta)
        expo = n * (n + be)
        us = [1 - t for t in ts]
        cs = [mp.exp(log_gap_hankel(n, alpha, beta, t, prec=mp.prec) - expo * mp.log(u))
              for t, u in zip(ts, us)]
        table = list(cs)
        m = len(us)
        for level in range(1, m):
            for i in range(m - level):
                j = i + level
                table[i] = (us[j] * table[i] - us[i] * table[i + 1]) / (us[j] - us[i])
        estimate = table[0]
        C = asymptotic_constant(n, alpha, beta, prec=mp.prec).C
        return estimate, abs(estimate - C) / C


# ---------------------------------------------------------------------------
# change of variable oracle


def shifted_integral(n: int, alpha, beta, t, npts: int = 32, prec: int | None = 128) -> mpf:
    """``D_n(t)`` for ``A = 0, B = 1`` from the integral moved onto ``[0, 1]^n``.

    ``x = t + (1-t) y`` turns the factor ``x^alpha`` into
    ``t^alpha (1 - z y)^alpha`` with ``z = 1 - 1/t`` and pulls out
    ``(1-t)^(n(n+beta)) t^(n alpha)``; the remaining integral keeps the
    squared Vandermonde.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    with numerics.working_precision(prec):
        tt = numerics.to_x(t)
        if not 0 < tt < 1:
            raise DomainError(f"t must lie in (0, 1), got {tt}")
        al, be = numerics.to_x(alpha), numerics.to_x(beta)
        z = 1 - 1 / tt
        y, w = numerics.jacobi_rule(npts, 0, be)
        weights = [wi * (1 - z * yi) ** al for yi, wi in zip(y, w)]
        inner = vandermonde_sq_sum(y, weights, n)
        return (1 - tt) ** (n * (n + be)) * tt ** (n * al) * inner
