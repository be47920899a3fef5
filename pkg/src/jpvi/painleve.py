"""Painleve VI checks: the sigma-form residual and the second-order equation for W_n.

``sigma(t) = H_n(t) + d1 t + d2`` is assembled from exact Hankel traces and
substituted into the Jimbo-Miwa-Okamoto sigma form.  The function
``W_n = 1 - (1-t) x_n / (2n+1+alpha+beta)`` obeys a Painleve VI equation;
it is checked pointwise with finite differences and by integrating the
equation with an adaptive Dormand-Prince 5(4) scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from mpmath import mp, mpf

from . import numerics
from .errors import DomainError, SingularLocus, StepUnderflow
from .identities import fd_apply, fd_stencil, rel_residual
from .moments import WeightParams, hankel
from .orthopoly import build_system, residues


def sigma_constants(n: int, params: WeightParams):
    """``(d1, d2, (nu1, nu2, nu3, nu4))`` of the sigma function."""
    al, be = params.alpha, params.beta
    d1 = -n * (n + al + be) - (al + be) ** 2 / 4
    d2 = (2 * n * (n + al + be) + be * (al + be)) / 4
    nu3 = (2 * n + al + be) / 2
    return d1, d2, ((al + be) / 2, (be - al) / 2, nu3, nu3)


@dataclass(frozen=True)
class SigmaTrace:
    n: int
    t: mpf
    d1: mpf
    d2: mpf
    nu: tuple[mpf, mpf, mpf, mpf]
    sigma: mpf
    sigma1: mpf
    sigma2: mpf
    residual: mpf


def sigma_form_sides(t, sigma, sigma1, sigma2, nu) -> tuple[mpf, mpf]:
    """Left and right sides of the sigma form of Painleve VI."""
    n1, n2, n3, n4 = nu
    lhs = (sigma1 * (t * (t - 1) * sigma2) ** 2
           + (2 * sigma1 * (t * sigma1 - sigma) - sigma1 ** 2 - n1 * n2 * n3 * n4) ** 2)
    rhs = mpf(1)
    for v in nu:
        rhs *= sigma1 + v ** 2
    return lhs, rhs


def sigma_trace(n: int, params: WeightParams, t, prec: int | None = None) -> SigmaTrace:
    if n < 1:
        raise DomainError("n must be >= 1")
    with numerics.working_precision(prec):
        t = numerics.to_x(t)
        if not 0 < t < 1:
            raise DomainError(f"t must lie in (0, 1), got {t}")
        hk = hankel(n, params, t, prec=mp.prec)
        d1, d2, nu = sigma_constants(n, params)
        sigma = hk.H + d1 * t + d2
        sigma1 = hk.H1 + d1
        sigma2 = hk.H2
        lhs, rhs = sigma_form_sides(t, sigma, sigma1, sigma2, nu)
        return SigmaTrace(n, t, d1, d2, nu, sigma, sigma1, sigma2, rel_residual(lhs, rhs))


# ---------------------------------------------------------------------------
# the W_n equation


def pvi_constants(n: int, params: WeightParams) -> tuple[mpf, mpf, mpf, mpf]:
    al, be = params.alpha, params.beta
    return (2 * n + al + be + 1) ** 2 / 2, -al ** 2 / 2, be ** 2 / 2, mpf(1) / 2


@dataclass(frozen=True)
class PviState:
    n: int
    params: WeightParams
    a: mpf
    b: mpf
    c: mpf
    d: mpf
    t: mpf
    W: mpf
    W1: mpf

    @classmethod
    def start(cls, n: int, params: WeightParams, t, W, W1) -> "PviState":
        a, b, c, d = pvi_constants(n, params)
        return cls(n, params, a, b, c, d, mpf(t), mpf(W), mpf(W1))

    def distance_to_singular(self) -> mpf:
        return min(abs(self.W), abs(self.W - 1), abs(self.W - self.t))


def _second_derivative(a, b, c, d, t, W, W1) -> mpf:
    if t == 0 or t == 1:
        raise SingularLocus(f"t = {t} is a fixed singular point", None)
    if W == 0 or W == 1 or W == t:
        raise SingularLocus(f"W = {W} sits on a singular locus at t = {t}", None)
    Wt = W - t
    quad = (1 / W + 1 / (W - 1) + 1 / Wt) * W1 ** 2 / 2
    lin = (1 / t + 1 / (t - 1) + 1 / Wt) * W1
    force = (a + b * t / W ** 2 + c * (t - 1) / (W - 1) ** 2 + d * t * (t - 1) / Wt ** 2)
    return quad - lin + W * (W - 1) * Wt / (t ** 2 * (t - 1) ** 2) * force


def pvi_rhs(state: PviState) -> mpf:
    """``W''`` from the Painleve VI right-hand side."""
    try:
        return _second_derivative(state.a, state.b, state.c, state.d, state.t, state.W, state.W1)
    except SingularLocus as exc:
        raise SingularLocus(str(exc), state) from None


def wn_value(n: int, params: WeightParams, t) -> mpf:
    """``W_n(t) = 1 - (1-t) x_n / (2n+1+alpha+beta)`` at the working precision."""
    t = numerics.to_x(t)
    sys = build_system(n, params, t, prec=mp.prec)
    x = residues(sys, n)[2]
    return 1 - (1 - t) * x / (2 * n + 1 + params.alpha + params.beta)


def wn_from_pipeline(n: int, params: WeightParams, t, h="1e-8",
                     prec: int | None = None) -> tuple[mpf, mpf]:
    """``(W_n(t), W_n'(t))`` from ``x_n``; the derivative is a 5-point difference."""
    with numerics.working_precision(prec):
        t = numerics.to_x(t)
        h = numerics.to_x(h)
        if not 0 < t < 1 or not 0 < t - 2 * h or not t + 2 * h < 1:
            raise DomainError(f"t must lie in (0, 1) with room for the stencil, got {t}")
        values = [wn_value(n, params, s) for s in fd_stencil(t, h)]
        return values[2], fd_apply(values, h)


def pvi_pointwise_residual(n: int, params: WeightParams, t, h="1e-8",
                           prec: int | None = None) -> dict[str, mpf]:
    """Compare a finite-difference ``W''`` on the pipeline trajectory with the equation."""
    with numerics.working_precision(prec):
        t = numerics.to_x(t)
        h = numerics.to_x(h)
        values = [wn_value(n, params, s) for s in fd_stencil(t, h)]
        W = values[2]
        W1 = fd_apply(values, h)
        W2 = (-values[0] + 16 * values[1] - 30 * values[2] + 16 * values[3] - values[4]) / (12 * h * h)
        rhs = pvi_rhs(PviState.start(n, params, t, W, W1))
        return {"t": t, "W": W, "W1": W1, "W2_fd": W2, "W2_rhs": rhs,
                "residual": rel_residual(W2, rhs)}


# Dormand-Prince 5(4) tableau
_DP_C = ("0", "1/5", "3/10", "4/5", "8/9", "1", "1")
_DP_A = (
    (),
    ("1/5",),
    ("3/40", "9/40"),
    ("44/45", "-56/15", "32/9"),
    ("19372/6561", "-25360/2187", "64448/6561", "-212/729"),
    ("9017/3168", "-355/33", "46732/5247", "49/176", "-5103/18656"),
    ("35/384", "0", "500/1113", "125/192", "-2187/6784", "11/84"),
)
_DP_B5 = ("35/384", "0", "500/1113", "125/192", "-2187/6784", "11/84", "0")
_DP_B4 = ("5179/57600", "0", "7571/16695", "393/640", "-92097/339200", "187/2100", "1/40")


def _frac(s: str) -> mpf:
    num, _, den = s.partition("/")
    return mpf(int(num)) / int(den or 1)


def _tableau():
    c = [_frac(v) for v in _DP_C]
    A = [[_frac(v) for v in row] for row in _DP_A]
    b5 = [_frac(v) for v in _DP_B5]
    err = [_frac(p) - _frac(q) for p, q in zip(_DP_B5, _DP_B4)]
    return c, A, b5, err


@dataclass(frozen=True)
class Trajectory:
    states: tuple[PviState, ...]
    accepted: int
    rejected: int

    def at(self, t) -> PviState:
        t = mpf(t)
        for s in self.states:
            if s.t == t:
                return s
        raise KeyError(f"no output state at t = {t}")


def pvi_integrate(n: int, params: WeightParams, t0, t1, seed, grid=(), tol="1e-20",
                  min_distance="1e-6", h0=None, max_steps: int = 200_000,
                  prec: int | None = None) -> Trajectory:
    """Integrate the W_n equation from ``t0`` to ``t1`` (either direction).

    ``seed`` is ``(W(t0), W'(t0))``.  Steps are clipped so that every point of
    ``grid`` between the endpoints, and ``t1`` itself, is hit exactly; the
    returned trajectory holds the states there.  A state closer than
    ``min_distance`` to ``W in {0, 1, t}`` aborts the run with
    :class:`SingularLocus` carrying the last good state.
    """
    with numerics.working_precision(prec):
        t0, t1 = numerics.to_x(t0), numerics.to_x(t1)
        if not (0 < t0 < 1 and 0 < t1 < 1) or t0 == t1:
            raise DomainError(f"need distinct t0, t1 in (0, 1), got {t0}, {t1}")
        tol = numerics.to_x(tol)
        gap = numerics.to_x(min_distance)
        direction = 1 if t1 > t0 else -1
        inner = {g for g in map(numerics.to_x, grid) if direction * (g - t0) > 0 < direction * (t1 - g)}
        targets = sorted(inner | {t1}, reverse=direction < 0)
        c, A, b5, err = _tableau()
        state = PviState.start(n, params, t0, *seed)
        if state.distance_to_singular() < gap:
            raise SingularLocus("seed is too close to a singular locus", state)
        a_, b_, c_, d_ = state.a, state.b, state.c, state.d

        def f(t, y):
            return (y[1], _second_derivative(a_, b_, c_, d_, t, y[0], y[1]))

        span = abs(t1 - t0)
        h = numerics.to_x(h0) if h0 is not None else span / 100
        h_min = span * mpf(2) ** (-mp.prec // 2)
        out = [state]
        accepted = rejected = 0
        t, y = state.t, (state.W, state.W1)
        k1 = f(t, y)
        for target in targets:
            while direction * (target - t) > 0:
                if accepted + rejected >= max_steps:
                    raise StepUnderflow(f"step budget {max_steps} exhausted at t = {t}", out[-1])
                step = min(h, abs(target - t))
                hs = direction * step
                try:
                    ks = [k1]
                    for i in range(1, 7):
                        yi = tuple(y[m] + hs * mp.fsum(A[i][j] * ks[j][m] for j in range(i))
                                   for m in range(2))
                        ks.append(f(t + c[i] * hs, yi))
                except SingularLocus:
                    ratio = None
                else:
                    y5 = tuple(y[m] + hs * mp.fsum(b5[j] * ks[j][m] for j in range(7)) for m in range(2))
                    e = [abs(hs * mp.fsum(err[j] * ks[j][m] for j in range(7))) for m in range(2)]
                    ratio = max(e[m] / (tol * max(1, abs(y5[m]))) for m in range(2))
                if ratio is None or ratio > 1:
                    rejected += 1
                    shrink = mpf("0.2") if ratio is None else max(mpf("0.2"), mpf("0.9") * ratio ** (-mpf(1) / 5))
                    h = step * shrink
                    if h < h_min:
                        raise StepUnderflow(f"step size underflow at t = {t}", out[-1])
                    continue
                accepted += 1
                t_new = target if step == abs(target - t) else t + hs
                candidate = replace(out[-1], t=t_new, W=y5[0], W1=y5[1])
                if candidate.distance_to_singular() < gap:
                    raise SingularLocus(f"trajectory within {gap} of a singular locus at t = {t_new}",
                                        out[-1])
                t, y = t_new, y5
                k1 = ks[6]
                grow = mpf(5) if ratio == 0 else min(mpf(5), mpf("0.9") * ratio ** (-mpf(1) / 5))
                # a step clipped to a grid point says nothing about the usable size
                h = max(step * grow, h) if step < h else step * grow
                last = candidate
            out.append(last)
        return Trajectory(tuple(out), accepted, rejected)


def pvi_compare(n: int, params: WeightParams, t0="0.1", t1="0.9", count: int = 17,
                tol="1e-20", prec: int | None = None) -> list[dict]:
    """Integrated ``W_n`` against the pipeline value on an even grid over ``[t0, t1]``."""
    with numerics.working_precision(prec):
        t0, t1 = numerics.to_x(t0), numerics.to_x(t1)
        if count < 2:
            raise DomainError("count must be >= 2")
        grid = [t0 + (t1 - t0) * i / (count - 1) for i in range(count)]
        seed = wn_from_pipeline(n, params, t0)
        traj = pvi_integrate(n, params, t0, t1, seed, grid=grid[1:-1], tol=tol)
        records = []
        for s in traj.states:
            W = wn_value(n, params, s.t)
            records.append({"t": s.t, "W_integrated": s.W, "W_pipeline": W,
                            "residual": abs(s.W - W)})
        return records
