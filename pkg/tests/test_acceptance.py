"""Acceptance criteria, one test each.

Every test records a ``[PASS]`` or ``[FAIL]`` line with the worst value it
saw; the lines are repeated in the terminal summary.
"""

from mpmath import mp, mpf

from jpvi.gap import (
    asymptotic_check,
    asymptotic_constant,
    dn0_closed_form,
    gap_hankel,
    log_gap_gram,
    log_gap_hankel,
)
from jpvi.identities import run_suite, toda_residuals
from jpvi.moments import WeightParams, hankel, multiint_oracle
from jpvi.orthopoly import build_system, residues
from jpvi.painleve import pvi_compare, pvi_pointwise_residual, sigma_trace

from conftest import CRITERIA

SETS = [
    (2, "1", "1", "1", "1"),
    (3, "1.5", "0.5", "0", "1"),
    (4, "2", "3", "1", "2"),
    (5, "0.7", "2.3", "2", "-1"),
]
GRID = [mpf(k) / 20 for k in range(2, 19)]


def params(a, b, A, B):
    return WeightParams.of(a, b, A, B)


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    CRITERIA.append(line)
    print(line)
    assert ok, line


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), mpf(1))


def test_criterion_1_sigma_form():
    worst = mpf(0)
    for n, a, b, A, B in SETS:
        p = params(a, b, A, B)
        for t in GRID:
            worst = max(worst, sigma_trace(n, p, t, prec=256).residual)
    record(1, "sigma form on the 4 x 17 grid", worst <= mpf("1e-18"), f"worst {mp.nstr(worst, 3)}")


def test_criterion_2_identity_suite():
    worst_exact = worst_fd = worst_sum = mpf(0)
    failing = set()
    for n, a, b, A, B in SETS:
        p = params(a, b, A, B)
        for t in GRID:
            report = run_suite(n, p, t, prec=256)
            for tag, r in report.residuals.items():
                if r.fd:
                    worst_fd = max(worst_fd, r.rel)
                    bad = r.rel > mpf("1e-10")
                else:
                    worst_exact = max(worst_exact, r.rel)
                    bad = r.rel > mpf("1e-18")
                if tag.startswith("sum_"):
                    worst_sum = max(worst_sum, r.rel)
                if bad:
                    failing.add(tag)
    detail = (f"exact {mp.nstr(worst_exact, 3)}, fd {mp.nstr(worst_fd, 3)}, "
              f"sum rules {mp.nstr(worst_sum, 3)}, failing {sorted(failing) or 'none'}")
    record(2, "identity suite on the 4 x 17 grid", not failing, detail)


def test_criterion_3_toda():
    worst = mpf(0)
    for n, a, b, A, B in SETS:
        p = params(a, b, A, B)
        for t in GRID:
            res = toda_residuals(n, p, t, h="1e-8", prec=192)
            worst = max(worst, max(r.rel for r in res.values()))
    record(3, "Toda and y' = t r' by finite differences", worst <= mpf("1e-10"),
           f"worst {mp.nstr(worst, 3)}")


def test_criterion_4_gap():
    worst_cubic = mpf(0)
    for k in range(1, 10):
        t = mpf(k) / 10
        worst_cubic = max(worst_cubic, abs(gap_hankel(1, 1, 1, t) - (1 - 3 * t ** 2 + 2 * t ** 3)))
    worst_routes = mpf(0)
    for n in range(1, 7):
        for a, b in (("1", "1"), ("1.5", "0.5"), ("2", "3"), ("0.5", "2.5")):
            for t in ("0.1", "0.3", "0.5", "0.7", "0.9"):
                # the log difference is the relative difference of the probabilities
                d = abs(log_gap_hankel(n, a, b, t) - log_gap_gram(n, a, b, t))
                worst_routes = max(worst_routes, d)
    ok = worst_cubic <= mpf("1e-25") and worst_routes <= mpf("1e-20")
    record(4, "gap probability closed form and Gram route", ok,
           f"cubic {mp.nstr(worst_cubic, 3)}, routes {mp.nstr(worst_routes, 3)}")


def test_criterion_5_asymptotic_constant():
    exact = abs(asymptotic_constant(1, 1, 1).C - 3)
    worst = mpf(0)
    for n, a, b in ((2, "1", "1"), (2, "2", "3"), (3, "1.5", "0.5")):
        _, r = asymptotic_check(n, a, b, ("0.9", "0.99", "0.999", "0.9999"))
        worst = max(worst, r)
    ok = exact <= mpf(2) ** (-240) and worst <= mpf("1e-3")
    record(5, "edge constant and its extrapolation", ok,
           f"|C - 3| {mp.nstr(exact, 3)}, extrapolation {mp.nstr(worst, 3)}")


def test_criterion_6_closed_form_d0():
    values = ("0.5", "1", "1.5", "2", "3")
    worst = mpf(0)
    for a in values:
        for b in values:
            p = params(a, b, 0, 1)
            for n in range(1, 6):
                d = abs(dn0_closed_form(n, a, b) - hankel(n, p, 0).log_det)
                worst = max(worst, d)
    record(6, "Barnes G form of D_n(0), 25 pairs, n <= 5", worst <= mpf("1e-20"),
           f"worst log difference {mp.nstr(worst, 3)}")


def test_criterion_7_pvi():
    p = params("1", "1", "0", "1")
    pointwise = max(pvi_pointwise_residual(2, p, t)["residual"] for t in GRID)
    records = pvi_compare(2, p, "0.1", "0.9", count=17)
    sup = max(r["residual"] for r in records)
    ok = pointwise <= mpf("1e-8") and sup <= mpf("1e-8")
    record(7, "W_n equation pointwise and integrated", ok,
           f"pointwise {mp.nstr(pointwise, 3)}, sup-norm {mp.nstr(sup, 3)}")


def test_criterion_8_multiple_integral():
    worst = mpf(0)
    for n, a, b, A, B in ((1, "1.5", "0.5", "1", "1"), (2, "2", "3", "1", "2"),
                          (3, "1.5", "0.5", "1", "1"), (3, "0.7", "2.3", "2", "-1")):
        p = params(a, b, A, B)
        for t in ("0.1", "0.3", "0.5", "0.7", "0.9"):
            oracle = multiint_oracle(n, p, t)
            det = hankel(n, p, t).det
            worst = max(worst, abs(oracle - det) / abs(det))
    record(8, "multiple integral against the determinant", worst <= mpf("1e-15"),
           f"worst {mp.nstr(worst, 3)}")


def _fingerprint(n, p, t):
    sys = build_system(n + 1, p, t, prec=256)
    out = list(sys.alpha_rec) + list(sys.beta_rec[1:]) + list(sys.p1)
    for j in range(n + 1):
        out += list(residues(sys, j))
    out.append(sigma_trace(n, p, t, prec=256).residual)
    out += [r.rel for r in run_suite(n, p, t, prec=256).residuals.values()]
    out += [r.rel for r in toda_residuals(n, p, t, prec=256).values()]
    return out


def test_criterion_9_scale_invariance():
    worst = mpf(0)
    for n, a, b, A, B in SETS:
        p = params(a, b, A, B)
        for t in (mpf("0.2"), mpf("0.5"), mpf("0.85")):
            base = _fingerprint(n, p, t)
            for c in ("0.5", "2", "10"):
                other = _fingerprint(n, p.scaled(c), t)
                worst = max(worst, max(rel(u, v) for u, v in zip(base, other)))
    record(9, "invariance under (A, B) -> (cA, cB)", worst <= mpf("1e-25"),
           f"worst {mp.nstr(worst, 3)}")
