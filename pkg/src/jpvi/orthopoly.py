"""Monic orthogonal polynomials for the perturbed Jacobi weight.

The system is read off the LDL^T factorization of the (n_max+1)-square
Hankel matrix: the pivots are the norms ``h_j`` and the rows of ``L^{-1}``
are the monic coefficient vectors.  Everything else (recurrence
coefficients, ``p1``, the residues ``R_n, r_n`` and the tails ``x_n, y_n``)
is derived from those.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from mpmath import mp, mpf

from . import numerics
from .errors import DomainError, NotConverged, PoleEvaluation
from .moments import DEBUG, WeightParams, moment_table
from .specfun import log_beta, tail_beta


@dataclass(frozen=True)
class OPSystem:
    n_max: int
    t: mpf
    params: WeightParams
    alpha_rec: tuple[mpf, ...]  # alpha_0 .. alpha_{n_max-1}
    beta_rec: tuple[mpf, ...]  # index j holds beta_j; beta_0 = 0 is a placeholder
    h: tuple[mpf, ...]  # h_0 .. h_{n_max}
    p1: tuple[mpf, ...]  # p1(0) .. p1(n_max)
    coeffs: tuple[tuple[mpf, ...], ...]  # coeffs[n][k] multiplies z^k; coeffs[n][n] == 1
    prec: int = field(default=0, compare=False)
    _aux_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def w0(self, x) -> mpf:
        return self.params.w0(x)

    @cached_property
    def modified_moments(self) -> tuple[mpf, ...]:
        """``int_0^1 y^(alpha+k) (1-y)^(beta-1) w_J(y; t) dy`` by quadrature.

        These carry the ``1/(1-y)`` factor of the tail integrals ``x_n, y_n``.
        """
        return tuple(shifted_moment(k, self.params, self.t) for k in range(2 * self.n_max + 1))


def shifted_moment(k: int, params: WeightParams, t: mpf) -> mpf:
    """``int_0^1 y^(alpha+k) (1-y)^(beta-1) w_J(y; t) dy`` from Beta integrals."""
    a = params.alpha + k + 1
    total = mpf(0)
    if params.A:
        total += params.A * mp.exp(log_beta(a, params.beta))
    if params.B:
        total += params.B * tail_beta(a, params.beta, t)
    return total


def shifted_moment_quad(k: int, params: WeightParams, t: mpf) -> mpf:
    al, be = params.alpha, params.beta
    rule = numerics.QuadRule(target_rel_tol=mpf(2) ** (-mp.prec // 3), max_levels=12)

    def piece(lo, hi, c):
        if c == 0 or lo == hi:
            return mpf(0)
        v, ok = numerics.integrate(lambda y: y ** (al + k) * (1 - y) ** (be - 1), lo, hi, rule)
        if not ok:
            raise NotConverged(f"modified moment {k} on [{lo}, {hi}]", v)
        return c * v

    return piece(0, t, params.A) + piece(t, 1, params.A + params.B)


def _build(n_max: int, params: WeightParams, t: mpf) -> OPSystem:
    table = moment_table(n_max + 1, params, t, derivatives=False)
    F = numerics.factor_spd(numerics.hankel_matrix(table.mu, n_max + 1))
    C = F.inverse_lower()
    h = F.d
    coeffs = tuple(tuple(C[n][: n + 1]) for n in range(n_max + 1))
    p1 = (mpf(0),) + tuple(coeffs[n][n - 1] for n in range(1, n_max + 1))
    alpha_rec = tuple(p1[j] - p1[j + 1] for j in range(n_max))
    beta_rec = (mpf(0),) + tuple(h[j] / h[j - 1] for j in range(1, n_max + 1))
    return OPSystem(n_max, t, params, alpha_rec, beta_rec, tuple(h), p1, coeffs, prec=mp.prec)


def build_system(n_max: int, params: WeightParams, t, prec: int | None = None,
                 check: bool | None = None) -> OPSystem:
    """Monic OP system up to degree ``n_max`` at ``t`` in [0, 1).

    Escalates precision when the Hankel factorization loses too many bits.
    With ``check`` the orthogonality of the stored polynomials is verified
    by quadrature.
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")

    def run():
        tt = numerics.to_x(t)
        if not 0 <= tt < 1:
            raise DomainError(f"t must lie in [0, 1), got {tt}")
        return _build(n_max, params, tt)

    sys = numerics.with_escalation(run, prec=prec)
    if DEBUG if check is None else check:
        with numerics.working_precision(sys.prec):
            orthogonality_defect(sys, raise_above=mpf(2) ** (-sys.prec // 4))
    return sys


def orthogonality_defect(sys: OPSystem, raise_above=None) -> mpf:
    """Largest ``|<P_i, P_j>| / sqrt(h_i h_j)`` over ``i != j`` by quadrature."""
    p = sys.params
    rule = numerics.QuadRule(target_rel_tol=mpf(2) ** (-mp.prec // 3))
    worst = mpf(0)
    for i in range(sys.n_max + 1):
        for j in range(i):
            f = lambda x, i=i, j=j: (eval_poly(sys, i, x)[0] * eval_poly(sys, j, x)[0]
                                     * p.weight(x, sys.t))
            v, _ = numerics.integrate(f, 0, 1, rule, points=(sys.t,))
            worst = max(worst, abs(v) / mp.sqrt(sys.h[i] * sys.h[j]))
    if raise_above is not None and worst > raise_above:
        raise AssertionError(f"orthogonality defect {worst}")
    return worst


def eval_poly(sys: OPSystem, n: int, z) -> tuple[mpf, mpf]:
    """``(P_n(z), P_n'(z))`` by Horner on the stored coefficients."""
    if not 0 <= n <= sys.n_max:
        raise DomainError(f"degree {n} outside 0..{sys.n_max}")
    z = mpf(z)
    c = sys.coeffs[n]
    p = mpf(0)
    dp = mpf(0)
    for a in reversed(c):
        dp = dp * z + p
        p = p * z + a
    return p, dp


def poly_second_derivative(sys: OPSystem, n: int, z) -> mpf:
    z = mpf(z)
    c = sys.coeffs[n]
    return mp.fsum(k * (k - 1) * c[k] * z ** (k - 2) for k in range(2, n + 1))


def _poly_product(a, b):
    out = [mpf(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


@dataclass(frozen=True)
class AuxQuantities:
    """Residues and tails of the ladder functions at ``(n, t)``.

    ``x`` and ``y`` are the values implied by ``x = 2n+1+alpha+beta + tR``
    and ``y = t r - p1``; ``x_int`` and ``y_int`` are the defining integrals.
    """

    n: int
    t: mpf
    R: mpf
    r: mpf
    x: mpf
    y: mpf
    x_int: mpf
    y_int: mpf


def residues(sys: OPSystem, n: int) -> tuple[mpf, mpf, mpf, mpf]:
    """``(R_n, r_n, x_n, y_n)`` without any quadrature.

    ``R_n, r_n`` come from polynomial values at ``t``; ``x_n`` and ``y_n``
    from ``x = 2n+1+alpha+beta + tR`` and ``y = t r - p1(n)``.
    """
    if not 0 <= n <= sys.n_max:
        raise DomainError(f"n must lie in 0..{sys.n_max}")
    p = sys.params
    t = sys.t
    Pn = eval_poly(sys, n, t)[0]
    jump = p.B * sys.w0(t)
    R = jump * Pn ** 2 / sys.h[n]
    r = mpf(0) if n == 0 else jump * Pn * eval_poly(sys, n - 1, t)[0] / sys.h[n - 1]
    x = 2 * n + 1 + p.alpha + p.beta + t * R
    y = t * r - sys.p1[n]
    return R, r, x, y


def aux_quantities(sys: OPSystem, n: int, check: bool | None = None) -> AuxQuantities:
    """Auxiliary quantities at ``(n, t)`` with both routes for ``x_n, y_n``.

    The tails are integrated as polynomial combinations of the modified
    moments in :attr:`OPSystem.modified_moments`.
    """
    cached = sys._aux_cache.get(n)
    if cached is not None:
        return cached
    be = sys.params.beta
    with numerics.working_precision(max(mp.prec, sys.prec)):
        R, r, x, y = residues(sys, n)
        nu = sys.modified_moments
        c = sys.coeffs[n]
        sq = _poly_product(c, c)
        x_int = be * mp.fdot(sq, nu[: len(sq)]) / sys.h[n]
        if n == 0:
            y_int = mpf(0)
        else:
            cross = _poly_product(c, sys.coeffs[n - 1])
            y_int = be * mp.fdot(cross, nu[: len(cross)]) / sys.h[n - 1]
    aux = AuxQuantities(n, sys.t, R, r, x, y, x_int, y_int)
    if DEBUG if check is None else check:
        tol = mpf(2) ** (-mp.prec // 4)
        for a_, b_ in ((x, x_int), (y, y_int)):
            if abs(a_ - b_) > tol * max(abs(a_), 1):
                raise AssertionError(f"aux n={n}: identity {a_} vs integral {b_}")
    sys._aux_cache[n] = aux
    return aux


@dataclass(frozen=True)
class LadderData:
    n: int
    z: mpf
    A_val: mpf
    B_val: mpf


def v0_prime(params: WeightParams, z) -> mpf:
    z = mpf(z)
    return -params.alpha / z - params.beta / (z - 1)


def _check_pole(sys: OPSystem, z: mpf):
    if z == 0 or z == 1 or z == sys.t:
        raise PoleEvaluation(f"z = {z} is a pole of the ladder functions")


def ladder_A(aux: AuxQuantities, z, derivative: bool = False) -> mpf:
    z, t = mpf(z), aux.t
    R, x = aux.R, aux.x
    if derivative:
        return -R / (z - t) ** 2 + x / (z - 1) ** 2 - (x - R) / z ** 2
    return R / (z - t) - x / (z - 1) + (x - R) / z


def ladder_B(aux: AuxQuantities, z, derivative: bool = False) -> mpf:
    z, t = mpf(z), aux.t
    r, y, n = aux.r, aux.y, aux.n
    if derivative:
        return -r / (z - t) ** 2 + y / (z - 1) ** 2 - (y - r - n) / z ** 2
    return r / (z - t) - y / (z - 1) + (y - r - n) / z


def ladder_residuals(sys: OPSystem, n: int, z) -> dict[str, mpf]:
    """Scaled defects of the lowering and raising relations at ``z``."""
    z = mpf(z)
    _check_pole(sys, z)
    a_n, a_m = aux_quantities(sys, n), aux_quantities(sys, n - 1)
    Pn, dPn = eval_poly(sys, n, z)
    Pm, dPm = eval_poly(sys, n - 1, z)
    An, Bn = ladder_A(a_n, z), ladder_B(a_n, z)
    Am = ladder_A(a_m, z)
    beta_n = sys.beta_rec[n]
    low_terms = (dPn, Bn * Pn, beta_n * An * Pm)
    low = dPn + Bn * Pn - beta_n * An * Pm
    up_terms = (dPm, Bn * Pm, v0_prime(sys.params, z) * Pm, Am * Pn)
    up = dPm - (Bn + v0_prime(sys.params, z)) * Pm + Am * Pn
    return {
        "lowering": abs(low) / max([abs(v) for v in low_terms] + [mpf(1)]),
        "raising": abs(up) / max([abs(v) for v in up_terms] + [mpf(1)]),
    }


def ladder_eval(sys: OPSystem, n: int, z, check: bool | None = None) -> LadderData:
    """``A_n(z)`` and ``B_n(z)`` from their partial fractions.

    With ``check`` the lowering/raising relations are asserted at ``z`` and
    the ``B_n(z) ~ -n/z`` decay is checked at ``|z| = 10^8``.
    """
    if not 1 <= n <= sys.n_max:
        raise DomainError(f"n must lie in 1..{sys.n_max}")
    z = mpf(z)
    _check_pole(sys, z)
    aux = aux_quantities(sys, n)
    out = LadderData(n, z, ladder_A(aux, z), ladder_B(aux, z))
    if DEBUG if check is None else check:
        tol = mpf(2) ** (-mp.prec // 4)
        res = ladder_residuals(sys, n, z)
        if max(res.values()) > tol:
            raise AssertionError(f"ladder relations fail at z={z}: {res}")
        big = mpf(10) ** 8
        if abs(big * ladder_B(aux, big) + n) > mpf(10) ** -6 * max(n, 1) * max(1, abs(aux.y) + abs(aux.r)):
            raise AssertionError("B_n(z) does not decay like -n/z")
    return out
