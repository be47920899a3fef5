"""Special functions: log-Gamma, 2F1 on the negative ray, tail Beta, Barnes G."""

from __future__ import annotations

import threading
from dataclasses import dataclass

from mpmath import mp, mpf

from .errors import DomainError, NotConverged


@dataclass(frozen=True)
class SpecFunConfig:
    precision_bits: int
    series_rel_tol: mpf
    max_terms: int = 200_000

    def __post_init__(self):
        floor = mpf(2) ** (-self.precision_bits + 8)
        if self.series_rel_tol < floor:
            raise ValueError(
                f"series_rel_tol {self.series_rel_tol} is below 2^(8-prec) for "
                f"{self.precision_bits} bits"
            )

    @classmethod
    def current(cls) -> "SpecFunConfig":
        """Config matching the active mpmath precision."""
        return cls(mp.prec, mpf(2) ** (-mp.prec + 8))


def _cfg(config: SpecFunConfig | None) -> SpecFunConfig:
    return SpecFunConfig.current() if config is None else config


_EULER_CACHE: dict[int, mpf] = {}
_EULER_LOCK = threading.Lock()


def euler_gamma() -> mpf:
    """Euler-Mascheroni constant at the working precision, cached per precision."""
    prec = mp.prec
    value = _EULER_CACHE.get(prec)
    if value is None:
        with _EULER_LOCK:
            value = _EULER_CACHE.get(prec)
            if value is None:
                value = +mp.euler
                _EULER_CACHE[prec] = value
    return value


def log_gamma(x, config: SpecFunConfig | None = None) -> mpf:
    x = mpf(x)
    if not x > 0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    return mp.loggamma(x)


def log_beta(a, b) -> mpf:
    return log_gamma(a) + log_gamma(b) - log_gamma(mpf(a) + mpf(b))


def _is_nonpositive_int(v: mpf) -> bool:
    return v <= 0 and v == mp.floor(v)


def _hyp_series(a: mpf, b: mpf, c: mpf, z: mpf, cfg: SpecFunConfig) -> tuple[mpf, mpf]:
    """Sum of the defining 2F1 series for ``|z| < 1`` and its largest term.

    The largest term tells the caller how many bits cancelled in the sum.
    """
    term = mpf(1)
    total = mpf(1)
    peak = mpf(1)
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        # terminating: sum exactly to the last nonzero term
        stop = int(-max(v for v in (a, b) if _is_nonpositive_int(v)))
        for k in range(stop):
            term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * z
            total += term
            peak = max(peak, abs(term))
        return total, peak
    # ratio of consecutive terms is below |z| only once k exceeds the parameters
    settle = int(max(abs(a), abs(b), abs(c))) + 2
    small = 0
    for k in range(cfg.max_terms):
        term = term * (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        peak = max(peak, abs(term))
        if k > settle and abs(term) <= cfg.series_rel_tol * abs(total):
            small += 1
            if small >= 2:
                return total, peak
        else:
            small = 0
    raise NotConverged(f"2F1 series did not converge in {cfg.max_terms} terms", total)


def _lost_bits(total: mpf, peak: mpf) -> int:
    if total == 0:
        return mp.prec
    return max(0, int(mp.ceil(mp.log(peak / abs(total), 2))))


def hyp2f1(a, b, c, z, config: SpecFunConfig | None = None, method: str = "auto") -> mpf:
    """Gauss hypergeometric function for real ``z <= 0``.

    ``method`` selects the route: ``"series"`` sums the defining series
    (needs ``|z| < 1``), ``"pfaff"`` sums the series of the Pfaff transform
    ``(1-z)^(-a) 2F1(a, c-b; c; z/(z-1))``.  ``"auto"`` uses the series on
    ``(-1, 0]`` and the Pfaff transform for ``z <= -1``.
    """
    cfg = _cfg(config)
    a, b, c, z = mpf(a), mpf(b), mpf(c), mpf(z)
    if _is_nonpositive_int(c):
        raise DomainError(f"c must not be a nonpositive integer, got {c}")
    if z > 0:
        raise DomainError(f"hyp2f1 supports z <= 0 only, got {z}")
    if z == 0:
        return mpf(1)
    if method == "auto":
        method = "series" if z > -1 else "pfaff"
    if method == "series":
        if not z > -1:
            raise DomainError("direct series needs z > -1")
        args = (a, b, c, z)
    elif method == "pfaff":
        args = (a, c - b, c, z / (z - 1))
    else:
        raise ValueError(f"unknown method {method!r}")
    extra = 20
    for _ in range(4):
        with mp.extraprec(extra):
            if method == "pfaff":
                # recompute the argument at the raised precision
                args = (a, c - b, c, z / (z - 1))
            total, peak = _hyp_series(*args, cfg)
            lost = _lost_bits(total, peak)
            if lost + 10 <= extra:
                value = total if method == "series" else (1 - z) ** (-a) * total
                return +value
        # alternating terms cancelled; redo with that many more guard bits
        extra = lost + 20
    raise NotConverged("2F1 series keeps losing precision to cancellation", total)


def _power_sum(p: mpf, q: mpf, u: mpf, cfg: SpecFunConfig) -> mpf:
    """``sum_k (p)_k / k! * u^k / (q + k)`` for 0 <= u <= 1/2."""
    term = mpf(1)
    total = 1 / q
    if _is_nonpositive_int(p):
        for k in range(int(-p)):
            term = term * (p + k) / (k + 1) * u
            total += term / (q + k + 1)
        return total
    small = 0
    settle = int(abs(p)) + 2
    for k in range(cfg.max_terms):
        term = term * (p + k) / (k + 1) * u
        contrib = term / (q + k + 1)
        total += contrib
        if k > settle and abs(contrib) <= cfg.series_rel_tol * abs(total):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise NotConverged("tail Beta series did not converge", total)


def tail_beta(a, b, t, config: SpecFunConfig | None = None) -> mpf:
    """Upper incomplete Beta integral ``int_t^1 x^(a-1) (1-x)^(b-1) dx``.

    For ``t >= 1/2`` the integral is expanded in powers of ``1 - t`` around
    the upper endpoint; below 1/2 it is the complete Beta value minus the
    lower integral expanded in powers of ``t``.  Both series converge at
    least like ``2^-k``.
    """
    cfg = _cfg(config)
    a, b, t = mpf(a), mpf(b), mpf(t)
    if not (a > 0 and b > 0):
        raise DomainError(f"tail_beta needs a, b > 0, got {a}, {b}")
    if not 0 <= t <= 1:
        raise DomainError(f"tail_beta needs t in [0, 1], got {t}")
    if t == 1:
        return mpf(0)
    with mp.extraprec(32):
        complete = mp.exp(log_beta(a, b))
        if t == 0:
            return +complete
        if t >= mpf(1) / 2:
            u = 1 - t
            value = u ** b * _power_sum(1 - a, b, u, cfg)
        else:
            value = complete - t ** a * _power_sum(1 - b, a, t, cfg)
    return +value


def _log_barnes_g_window(s: mpf, cfg: SpecFunConfig) -> mpf:
    """``ln G(1 + s)`` for ``s`` in [0, 1] from the Weierstrass product.

    The first ``N`` factors are taken directly; for ``k > N`` the summand
    ``k ln(1 + s/k) - s + s^2/(2k)`` is expanded in ``s/k`` and summed with
    Hurwitz zeta values, which converges like ``(s/N)^m``.
    """
    N = 24
    head = mp.fsum(k * mp.log1p(s / k) - s + s * s / (2 * k) for k in range(1, N + 1))
    tail = mpf(0)
    sm = s ** 3
    for m in range(3, cfg.max_terms):
        contrib = (-1) ** (m + 1) * sm / m * mp.zeta(m - 1, N + 1)
        tail += contrib
        if abs(contrib) <= cfg.series_rel_tol * max(abs(tail), abs(head), mpf(1)) / 16:
            break
        sm *= s
    else:
        raise NotConverged("Barnes G tail did not converge", tail)
    g = euler_gamma()
    return s / 2 * mp.log(2 * mp.pi) - (s * (s + 1) + g * s * s) / 2 + head + tail


def log_barnes_g(x, config: SpecFunConfig | None = None) -> mpf:
    """``ln G(x)`` for real ``x > 0``.

    The argument is moved into [1, 2] with ``ln G(x + 1) = ln Gamma(x) + ln G(x)``
    and the product formula is evaluated there.
    """
    cfg = _cfg(config)
    x = mpf(x)
    if not x > 0:
        raise DomainError(f"log_barnes_g needs x > 0, got {x}")
    steps = int(mp.ceil(x - 2)) if x > 2 else 0
    with mp.extraprec(16 + 2 * steps.bit_length()):
        if x < 1:
            return +(_log_barnes_g_window(x, cfg) - log_gamma(x))
        base = x - steps
        value = _log_barnes_g_window(base - 1, cfg)
        for j in range(steps):
            value += log_gamma(base + j)
    return +value
