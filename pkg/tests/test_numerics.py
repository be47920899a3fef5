import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from jpvi import numerics
from jpvi.errors import NotPositiveDefinite, PrecisionExhausted
from jpvi.moments import WeightParams, hankel, log_det_at, moment
from jpvi.numerics import QuadRule, factor_spd, hankel_matrix, integrate, logdet_derivatives

from conftest import close


def test_scalar_log_det():
    assert close(factor_spd([[4]]).log_det, mp.log(4), "1e-70")


def test_identity_log_det():
    F = factor_spd([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert F.log_det == 0
    assert F.sign == 1


def test_two_by_two_moment_hankel():
    p = WeightParams.of(1, 1, 1, 0)
    mu = [moment(k, p, "0.3") for k in range(3)]
    F = factor_spd(hankel_matrix(mu, 2))
    assert close(F.det, mpf(1) / 720, "1e-70")


def test_hankel_matrix_is_symmetric():
    M = hankel_matrix([mpf(k + 1) / 3 for k in range(7)], 4)
    assert all(M[i, j] is M[j, i] for i in range(4) for j in range(4))


def test_solve_roundtrip():
    M = [[4, 1, 2], [1, 3, 0], [2, 0, 5]]
    F = factor_spd(M)
    x = F.solve([1, 2, 3])
    back = [mp.fsum(M[i][j] * x[j] for j in range(3)) for i in range(3)]
    assert all(close(b, v, "1e-70") for b, v in zip(back, [1, 2, 3]))


def test_indefinite_matrix_rejected():
    with pytest.raises(NotPositiveDefinite) as exc:
        factor_spd([[1, 2], [2, 1]])
    assert exc.value.index == 1


def test_singular_matrix_is_precision_problem():
    with pytest.raises(PrecisionExhausted):
        factor_spd([[1, 1], [1, 1]])


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.lists(st.integers(-50, 50), min_size=21, max_size=21),
       st.lists(st.integers(1, 40), min_size=6, max_size=6))
def test_random_spd_determinant(n, offdiag, diag):
    L = [[mpf(0)] * n for _ in range(n)]
    it = iter(offdiag)
    for i in range(n):
        L[i][i] = mpf(diag[i]) / 7
        for j in range(i):
            L[i][j] = mpf(next(it)) / 13
    M = [[mp.fsum(L[i][k] * L[j][k] for k in range(n)) for j in range(n)] for i in range(n)]
    expected = mp.fsum(2 * mp.log(L[i][i]) for i in range(n))
    got = factor_spd(M).log_det
    assert abs(got - expected) <= mpf(2) ** (-mp.prec // 2) * max(1, abs(expected))


def test_logdet_derivatives_scalar():
    t = mpf("0.3")
    f = [[2 + mp.sin(t)]]
    f1 = [[mp.cos(t)]]
    f2 = [[-mp.sin(t)]]
    f3 = [[-mp.cos(t)]]
    d1, d2, d3 = logdet_derivatives(f, f1, f2, f3)
    g = lambda s: mp.log(2 + mp.sin(s))
    assert close(d1, mp.diff(g, t, 1), "1e-60")
    assert close(d2, mp.diff(g, t, 2), "1e-60")
    assert close(d3, mp.diff(g, t, 3), "1e-60")


def test_logdet_derivatives_constant():
    Z = [[0, 0], [0, 0]]
    assert logdet_derivatives([[2, 1], [1, 2]], Z, Z, Z) == (0, 0, 0)


def test_logdet_derivatives_match_matrix_family():
    # M(t) = [[1+t^2, t], [t, 2+e^t]]
    t = mpf("0.7")
    M = lambda s: [[1 + s * s, s], [s, 2 + mp.exp(s)]]
    M1 = [[2 * t, 1], [1, mp.exp(t)]]
    M2 = [[2, 0], [0, mp.exp(t)]]
    M3 = [[0, 0], [0, mp.exp(t)]]
    d = logdet_derivatives(M(t), M1, M2, M3)
    g = lambda s: factor_spd(M(s)).log_det
    for k in range(3):
        assert close(d[k], mp.diff(g, t, k + 1), "1e-50")


def test_first_log_derivative_against_difference():
    p = WeightParams.of(1, 1, 0, 1)
    t, h = mpf("0.5"), mpf("1e-8")
    fd = (log_det_at(2, p, t + h) - log_det_at(2, p, t - h)) / (2 * h)
    assert close(hankel(2, p, t).d_logdet[0], fd, "1e-12")


@pytest.mark.parametrize("f, a, b, num, den", [
    (lambda x: x * (1 - x), 0, 1, 1, 6),
    (lambda x: 1 / mp.sqrt(x), 0, 1, 2, 1),
    (lambda x: x * (1 - x), "0.5", 1, 1, 12),
])
def test_integrate_examples(f, a, b, num, den):
    value, ok = integrate(f, a, b)
    assert ok
    assert close(value, mpf(num) / den, "1e-30")


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=21, max_size=21),
       st.integers(0, 99), st.integers(1, 100))
def test_integrate_polynomials(coeffs, lo, width):
    a = mpf(lo) / 100
    b = min(a + mpf(width) / 100, mpf(1))
    c = [mpf(v) for v in coeffs]
    f = lambda x: mp.polyval(c[::-1], x)
    exact = mp.fsum(ck * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, ck in enumerate(c))
    value, _ = integrate(f, a, b)
    assert abs(value - exact) <= mpf("1e-30") * max(1, mp.fsum(abs(v) for v in c))


def test_integrate_splits_at_points():
    step = lambda x: 1 if x < mpf("0.3") else 3
    value, ok = integrate(step, 0, 1, points=("0.3",))
    assert ok
    assert close(value, mpf("0.3") + 3 * mpf("0.7"), "1e-30")


def test_quad_rule_validation():
    with pytest.raises(ValueError):
        QuadRule(kind="simpson")
    with pytest.raises(ValueError):
        QuadRule(max_levels=0)


def test_jacobi_rule_exact_for_moments():
    a, b = mpf("1.5"), mpf("0.5")
    nodes, weights = numerics.jacobi_rule(10, a, b)
    for k in range(19):
        got = mp.fsum(w * x ** k for x, w in zip(nodes, weights))
        assert close(got, mp.beta(a + k + 1, b + 1), "1e-60")


def test_escalation_doubles_until_success():
    seen = []

    def needs_bits():
        seen.append(mp.prec)
        if mp.prec < 1024:
            raise PrecisionExhausted("not yet")
        return mp.prec

    assert numerics.with_escalation(needs_bits, prec=256) == 1024
    assert seen == [256, 512, 1024]


def test_escalation_gives_up():
    def never():
        raise PrecisionExhausted("never", 3)

    with pytest.raises(PrecisionExhausted):
        numerics.with_escalation(never, prec=2048)


def test_default_precision_from_environment(monkeypatch):
    monkeypatch.setenv("JPVI_PREC_BITS", "384")
    assert numerics.default_prec() == 384
    with numerics.working_precision() as bits:
        assert bits == 384 and mp.prec == 384
    monkeypatch.setenv("JPVI_PREC_BITS", "32")
    with pytest.raises(ValueError):
        numerics.default_prec()


def test_decimal_strings_parse_exactly():
    with numerics.working_precision(256):
        assert numerics.to_x("0.1") * 10 == 1
        assert numerics.to_x(0.1) * 10 != 1
