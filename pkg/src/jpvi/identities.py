"""Residual suite for the difference and differential identities.

Each identity is evaluated with both sides computed from independent data:
recurrence coefficients and norms from the Hankel factorization, ``R_n, r_n``
from polynomial values at ``t``, ``x_n, y_n`` from their defining integrals,
and ``H_n, H_n'`` from the exact Hankel traces.  ``y_n'`` and ``x_n'`` have
no independent closed form and are taken from a 5-point centered
difference; identities that use them carry the ``fd`` flag.

Tags are short descriptive names: ``s1_*``, ``s2_*`` and ``s2p_*`` are the
residue balances at ``z = 0, 1, t`` of the compatibility conditions, the
``*_from_*`` entries are closed forms of one quantity in terms of others.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from mpmath import mp, mpf

from . import numerics
from .errors import DomainError, PoleEvaluation, ZeroDenominator
from .moments import WeightParams, hankel
from .orthopoly import (
    OPSystem,
    aux_quantities,
    build_system,
    eval_poly,
    ladder_A,
    ladder_B,
    poly_second_derivative,
    residues,
    v0_prime,
)

EXACT_TOL = mpf("1e-18")
FD_TOL = mpf("1e-10")


# tag -> identity checked, with s = 2n+alpha+beta and c = s+1
TAG_FORMULAS = {
    "s1_residue_t": "r[n+1] + r[n] = (t - alpha_n) R[n]",
    "s1_residue_1": "-(y[n+1] + y[n]) = (alpha_n - 1) x[n] + beta",
    "s1_residue_0": "y[n+1] + y[n] - r[n+1] - r[n] = 2n+1+alpha - alpha_n (x[n] - R[n])",
    "s2p_residue_t": "beta_n R[n] R[n-1] = r[n]^2",
    "s2p_residue_1": "beta_n x[n] x[n-1] = y[n]^2 + beta y[n]",
    "s2p_residue_0": "beta_n (x[n]-R[n]) (x[n-1]-R[n-1]) = q^2 - alpha q, q = y[n]-r[n]-n",
    "s2p_cross": "beta_n (x[n] R[n-1] + x[n-1] R[n]) = s y[n] - (2n+alpha) r[n] + 2 y[n] r[n] - n(n+alpha)",
    "sum_R": "sum_{j<n} R[j] = (s y[n] - n(n+alpha))/t + (s (y[n]-r[n]) - n(n+alpha))/(1-t)",
    "sum_x": "sum_{j<n} x[j] = (s (y[n]-r[n]) - n(n+alpha))/(1-t) + s r[n] + n(n+alpha+beta)",
    "sum_R_minus_x": "sum_{j<n} (R[j]-x[j]) = (s y[n] - n(n+alpha))/t - s r[n] + n(n+alpha+beta)",
    "sum_R_logdet": "sum_{j<n} R[j] = -(d/dt) ln D_n",
    "s2_residue_t": "(t - alpha_n)(r[n+1] - r[n]) = beta_{n+1} R[n+1] - beta_n R[n-1]",
    "s2_residue_1": "(1 - alpha_n)(y[n] - y[n+1]) = beta_n x[n-1] - beta_{n+1} x[n+1]",
    "s2_residue_0": "-alpha_n (y[n+1]-y[n]+r[n]-r[n+1]-1) = beta_{n+1}(x[n+1]-R[n+1]) - beta_n (x[n-1]-R[n-1])",
    "x_from_R": "x[n] = c + t R[n]",
    "alpha_from_y": "alpha_n = y[n+1] - y[n] + t (r[n] - r[n+1])",
    "p1_from_y": "p1(n) = -y[n] + t r[n]",
    "alpha_from_ry": "(s+2) alpha_n = 2t r[n] - 2 y[n] - beta + c t + (1-t) x[n]",
    "alpha_from_p1": "(s+2) alpha_n = 2 p1(n) - beta + c t + (1-t) x[n]",
    "beta_from_k": "(s-1)(s+1) beta_n = k(r[n], y[n], t)",
    "beta_from_p1_y": "(s-1)(s+1) beta_n = p1^2 + (2n+alpha) p1 + s(1-t) y[n] + n(n+alpha) t",
    "beta_from_p1_r": "(s-1)(s+1) beta_n = p1^2 + (s t - beta) p1 + s t (1-t) r[n] + n(n+alpha) t",
    "H_from_y": "H_n = s (y[n] - t r[n]) - n(n+alpha)",
    "H_from_p1": "H_n = -s p1(n) - n(n+alpha)",
    "r_from_H": "r[n] = -H_n' / s",
    "y_from_H": "y[n] = (-t H_n' + H_n + n(n+alpha)) / s",
    "y_prime_t_r_prime": "y[n]' = t r[n]'",
    "R_from_l": "R[n] = c (l - (1-t) y[n]') / (2k)",
    "R_inv_from_l": "1/R[n] = (l + (1-t) y[n]') / (2 c r[n]^2)",
    "y_prime_squared": "(1-t)^2 y[n]'^2 = l^2 - 4 k r[n]^2",
    "x_from_ltilde": "x[n] = c (l~ - t(1-t) y[n]') / (2k)",
    "x_inv_from_ltilde": "1/x[n] = (l~ + t(1-t) y[n]') / (2 c (beta + y[n]) y[n])",
    "r_step_from_x": "(s+2)(r[n] - r[n+1]) = 2 r[n] - x[n] + (1-t) x[n]' + c",
    "r_from_x": "r[n] = -1/2 + (c + (1-t) x[n]')/(2 x[n]) - (2y[n]+beta-(1-t)x[n]+t)(c-x[n])/(2t x[n])",
}

TODA_FORMULAS = {
    "log_h_prime": "(ln h_n)' = -R[n]",
    "beta_prime": "beta_n' = (R[n-1] - R[n]) beta_n",
    "alpha_prime": "alpha_n' = r[n] - r[n+1]",
    "p1_prime": "p1(n)' = r[n]",
    "y_prime_t_r_prime": "y[n]' = t r[n]'",
}


def rel_residual(lhs, rhs) -> mpf:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), mpf(1))


@dataclass(frozen=True)
class Residual:
    tag: str
    lhs: mpf
    rhs: mpf
    fd: bool = False

    @property
    def defect(self) -> mpf:
        return self.lhs - self.rhs

    @property
    def rel(self) -> mpf:
        return rel_residual(self.lhs, self.rhs)

    @property
    def tol(self) -> mpf:
        return FD_TOL if self.fd else EXACT_TOL

    @property
    def ok(self) -> bool:
        return self.rel <= self.tol


@dataclass(frozen=True)
class IdentityReport:
    n: int
    t: mpf
    residuals: dict[str, Residual]

    @property
    def worst(self) -> tuple[str, mpf]:
        tag = max(self.residuals, key=lambda k: self.residuals[k].rel)
        return tag, self.residuals[tag].rel

    @property
    def worst_exact(self) -> mpf:
        return max((r.rel for r in self.residuals.values() if not r.fd), default=mpf(0))

    @property
    def worst_fd(self) -> mpf:
        return max((r.rel for r in self.residuals.values() if r.fd), default=mpf(0))

    @property
    def failures(self) -> list[str]:
        return [tag for tag, r in self.residuals.items() if not r.ok]


@dataclass(frozen=True)
class SigmaFormIntermediates:
    l: mpf
    k: mpf
    l_tilde: mpf


def intermediates(n: int, params: WeightParams, r, y, t) -> SigmaFormIntermediates:
    al, be = params.alpha, params.beta
    s = 2 * n + al + be
    l = s * y - (2 * n + al) * r - 2 * t * r ** 2 + 2 * y * r - n * (n + al)
    k = (y - t * r) ** 2 + (2 * n + al) * t * r + (be - s * t) * y + n * (n + al) * t
    l_tilde = 2 * y ** 2 + (2 * be - (s + 2 * r) * t) * y + (2 * n + al) * t * r + n * (n + al) * t
    return SigmaFormIntermediates(l, k, l_tilde)


# integer weights over 12h, so nothing is rounded at import precision
FD5 = (1, -8, 0, 8, -1)


def fd_derivative(f: Callable[[mpf], mpf], t, h) -> mpf:
    """5-point centered first derivative, truncation error O(h^4)."""
    t, h = mpf(t), mpf(h)
    return mp.fsum(c * f(t + (j - 2) * h) for j, c in enumerate(FD5) if c) / (12 * h)


def fd_stencil(t, h) -> list[mpf]:
    t, h = mpf(t), mpf(h)
    return [t + (j - 2) * h for j in range(5)]


def fd_apply(values, h) -> mpf:
    """Combine values on :func:`fd_stencil` points into a first derivative."""
    return mp.fsum(c * v for c, v in zip(FD5, values) if c) / (12 * mpf(h))


def run_suite(n: int, params: WeightParams, t, fd_step="1e-8",
              prec: int | None = None) -> IdentityReport:
    """Evaluate every identity at ``(n, t)``; needs ``n >= 2`` for the n-1 neighbour."""
    if n < 2:
        raise DomainError("run_suite needs n >= 2")
    with numerics.working_precision(prec):
        t = numerics.to_x(t)
        if not 0 < t < 1:
            raise DomainError(f"t must lie in (0, 1), got {t}")
        h = numerics.to_x(fd_step)
        n_max = n + 2
        sys = build_system(n_max, params, t, prec=mp.prec)
        return _suite(n, params, t, h, sys)


def _suite(n: int, params: WeightParams, t: mpf, h: mpf, sys: OPSystem) -> IdentityReport:
    al, be = params.alpha, params.beta
    aux = {j: aux_quantities(sys, j) for j in range(0, n + 2)}
    R = {j: a.R for j, a in aux.items()}
    r = {j: a.r for j, a in aux.items()}
    x = {j: a.x_int for j, a in aux.items()}
    y = {j: a.y_int for j, a in aux.items()}
    a_n = sys.alpha_rec[n]
    b = sys.beta_rec
    p1 = sys.p1[n]
    s = 2 * n + al + be
    c_n = s + 1
    hk = hankel(n, params, t, prec=mp.prec)
    H, H1 = hk.H, hk.H1

    res: dict[str, Residual] = {}

    def add(tag, lhs, rhs, fd=False):
        res[tag] = Residual(tag, lhs, rhs, fd)

    # residues of the first compatibility condition
    add("s1_residue_t", r[n + 1] + r[n], (t - a_n) * R[n])
    add("s1_residue_1", -(y[n + 1] + y[n]), (a_n - 1) * x[n] + be)
    add("s1_residue_0", y[n + 1] + y[n] - r[n + 1] - r[n], 2 * n + 1 + al - a_n * (x[n] - R[n]))
    # residues of the summed compatibility condition
    add("s2p_residue_t", b[n] * R[n] * R[n - 1], r[n] ** 2)
    add("s2p_residue_1", b[n] * x[n] * x[n - 1], y[n] ** 2 + be * y[n])
    q = y[n] - r[n] - n
    add("s2p_residue_0", b[n] * (x[n] - R[n]) * (x[n - 1] - R[n - 1]), q ** 2 - al * q)
    add("s2p_cross", b[n] * (x[n] * R[n - 1] + x[n - 1] * R[n]),
        s * y[n] - (2 * n + al) * r[n] + 2 * y[n] * r[n] - n * (n + al))
    sum_R = mp.fsum(R[j] for j in range(n))
    sum_x = mp.fsum(x[j] for j in range(n))
    at_t = (s * y[n] - n * (n + al)) / t
    at_1 = (s * (y[n] - r[n]) - n * (n + al)) / (1 - t)
    add("sum_R", sum_R, at_t + at_1)
    add("sum_x", sum_x, at_1 + s * r[n] + n * (n + al + be))
    add("sum_R_minus_x", sum_R - sum_x, at_t - s * r[n] + n * (n + al + be))
    add("sum_R_logdet", sum_R, -hk.d_logdet[0])
    # residues of the second compatibility condition
    add("s2_residue_t", (t - a_n) * (r[n + 1] - r[n]), b[n + 1] * R[n + 1] - b[n] * R[n - 1])
    add("s2_residue_1", (1 - a_n) * (y[n] - y[n + 1]), b[n] * x[n - 1] - b[n + 1] * x[n + 1])
    add("s2_residue_0", -a_n * (y[n + 1] - y[n] + r[n] - r[n + 1] - 1),
        b[n + 1] * x[n + 1] - b[n] * x[n - 1] + b[n] * R[n - 1] - b[n + 1] * R[n + 1])
    # recurrence data and H_n expressed through r_n, y_n
    add("x_from_R", x[n], c_n + t * R[n])
    add("alpha_from_y", a_n, y[n + 1] - y[n] + t * (r[n] - r[n + 1]))
    add("p1_from_y", p1, -y[n] + t * r[n])
    add("alpha_from_ry", (s + 2) * a_n, 2 * t * r[n] - 2 * y[n] - be + c_n * t + (1 - t) * x[n])
    add("alpha_from_p1", (s + 2) * a_n, 2 * p1 - be + c_n * t + (1 - t) * x[n])
    mid = intermediates(n, params, r[n], y[n], t)
    lhs_beta = (s - 1) * (s + 1) * b[n]
    add("beta_from_k", lhs_beta, mid.k)
    add("beta_from_p1_y", lhs_beta, p1 ** 2 + (2 * n + al) * p1 + s * (1 - t) * y[n] + n * (n + al) * t)
    # p1'(n, t) = r_n is exact, so the third form needs no finite difference
    add("beta_from_p1_r", lhs_beta,
        p1 ** 2 + (-be + s * t) * p1 + s * t * (1 - t) * r[n] + n * (n + al) * t)
    add("H_from_y", H, s * (y[n] - t * r[n]) - n * (n + al))
    add("H_from_p1", H, -s * p1 - n * (n + al))
    add("r_from_H", r[n], -H1 / s)
    add("y_from_H", y[n], (-t * H1 + H + n * (n + al)) / s)

    # derivative-based identities
    n_max = sys.n_max

    shifted = [residues(build_system(n_max, params, tt, prec=mp.prec), n)
               for tt in fd_stencil(t, h)]
    rp = fd_apply([v[1] for v in shifted], h)
    xp = fd_apply([v[2] for v in shifted], h)
    yp = fd_apply([v[3] for v in shifted], h)
    add("y_prime_t_r_prime", yp, t * rp, fd=True)
    l, k = mid.l, mid.k
    add("R_from_l", R[n], c_n * (l - (1 - t) * yp) / (2 * k), fd=True)
    add("R_inv_from_l", 1 / R[n], (l + (1 - t) * yp) / (2 * c_n * r[n] ** 2), fd=True)
    add("y_prime_squared", (1 - t) ** 2 * yp ** 2, l ** 2 - 4 * k * r[n] ** 2, fd=True)
    lt = mid.l_tilde
    add("x_from_ltilde", x[n], c_n * (lt - t * (1 - t) * yp) / (2 * k), fd=True)
    add("x_inv_from_ltilde", 1 / x[n], (lt + t * (1 - t) * yp) / (2 * c_n * (be + y[n]) * y[n]), fd=True)
    add("r_step_from_x", (s + 2) * (r[n] - r[n + 1]), 2 * r[n] - x[n] + (1 - t) * xp + c_n, fd=True)
    add("r_from_x", r[n],
        -mpf(1) / 2 + (c_n + (1 - t) * xp) / (2 * x[n])
        - (2 * y[n] + be - (1 - t) * x[n] + t) * (c_n - x[n]) / (2 * t * x[n]), fd=True)
    return IdentityReport(n, t, res)


def ode_z_residual(sys: OPSystem, n: int, z) -> mpf:
    """Scaled defect of the second-order ODE in ``z`` satisfied by ``P_n``.

    Uses the reference potential derivative ``v0'(z)``; the jump adds
    nothing away from ``z = t``.
    """
    z = mpf(z)
    if z == 0 or z == 1 or z == sys.t:
        raise PoleEvaluation(f"z = {z} is a pole")
    if not 1 <= n <= sys.n_max:
        raise DomainError(f"n must lie in 1..{sys.n_max}")
    auxs = [aux_quantities(sys, j) for j in range(n + 1)]
    a_n = auxs[n]
    An = ladder_A(a_n, z)
    if An == 0:
        raise ZeroDenominator(f"A_{n}({z}) vanishes")
    dAn = ladder_A(a_n, z, derivative=True)
    Bn = ladder_B(a_n, z)
    dBn = ladder_B(a_n, z, derivative=True)
    sum_A = mp.fsum(ladder_A(auxs[j], z) for j in range(n))
    P, dP = eval_poly(sys, n, z)
    d2P = poly_second_derivative(sys, n, z)
    ratio = dAn / An
    terms = (
        d2P,
        -(v0_prime(sys.params, z) + ratio) * dP,
        (dBn - Bn * ratio + sum_A) * P,
    )
    return abs(mp.fsum(terms)) / max([abs(v) for v in terms] + [mpf(1)])


def erratum_scan(cases, precs=(256, 512)) -> dict[str, str]:
    """Tags that fail in every case and at every precision.

    ``cases`` is an iterable of ``(n, params, t)``.  A tag failing only
    somewhere points to the implementation or conditioning; failing
    everywhere it is reported as a possible misprint of that equation.
    """
    failing: set[str] | None = None
    for prec in precs:
        for n, params, t in cases:
            report = run_suite(n, params, t, prec=prec)
            bad = set(report.failures)
            failing = bad if failing is None else failing & bad
    return {tag: f"possible erratum: identity {tag!r} fails everywhere" for tag in sorted(failing or ())}


def toda_residuals(n: int, params: WeightParams, t, h="1e-8",
                   prec: int | None = None) -> dict[str, Residual]:
    """Finite-difference checks of the ``t``-evolution of the OP data.

    ``(ln h_n)' = -R_n``, ``beta_n' = (R_{n-1} - R_n) beta_n``,
    ``alpha_n' = r_n - r_{n+1}``, ``p1'(n) = r_n`` and ``y_n' = t r_n'``.
    """
    if n < 1:
        raise DomainError("toda_residuals needs n >= 1")
    with numerics.working_precision(prec):
        t = numerics.to_x(t)
        h = numerics.to_x(h)
        n_max = n + 1

        def sys_at(tt):
            return build_system(n_max, params, tt, prec=mp.prec)

        sys = sys_at(t)
        a_m, a_n, a_p = (residues(sys, j) for j in (n - 1, n, n + 1))
        shifted = [sys_at(tt) for tt in fd_stencil(t, h)]
        d = lambda f: fd_apply([f(s_) for s_ in shifted], h)
        out = [
            Residual("log_h_prime", d(lambda s_: mp.log(s_.h[n])), -a_n[0], fd=True),
            Residual("beta_prime", d(lambda s_: s_.beta_rec[n]),
                     (a_m[0] - a_n[0]) * sys.beta_rec[n], fd=True),
            Residual("alpha_prime", d(lambda s_: s_.alpha_rec[n]), a_n[1] - a_p[1], fd=True),
            Residual("p1_prime", d(lambda s_: s_.p1[n]), a_n[1], fd=True),
            Residual("y_prime_t_r_prime", d(lambda s_: residues(s_, n)[3]),
                     t * d(lambda s_: residues(s_, n)[1]), fd=True),
        ]
        return {r.tag: r for r in out}


def log_det_integral_form(n: int, params: WeightParams, t, prec: int | None = None) -> mpf:
    """``ln D_n(t)`` rebuilt from ``ln D_n(0)`` and an integral of ``p1(n, s)``.

    ``(ln D_n)' = s(p1(n,t) - p1(n,0)) / (t(1-t))`` with ``s = 2n+alpha+beta``
    is integrated over ``[0, t]`` by tanh-sinh quadrature.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    with numerics.working_precision(prec):
        t = numerics.to_x(t)
        if not 0 <= t < 1:
            raise DomainError(f"t must lie in [0, 1), got {t}")
        base = hankel(n, params, 0, prec=mp.prec).log_det
        if t == 0:
            return base
        p10 = build_system(n, params, 0, prec=mp.prec).p1[n]
        s = 2 * n + params.alpha + params.beta

        def f(u):
            return (build_system(n, params, u, prec=mp.prec).p1[n] - p10) / (u * (1 - u))

        rule = numerics.QuadRule(target_rel_tol=mpf("1e-15"), max_levels=8)
        value, _ = numerics.integrate(f, 0, t, rule)
        return base + s * value
