import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from jpvi.errors import DomainError, PoleEvaluation
from jpvi.identities import toda_residuals
from jpvi.moments import WeightParams, moment
from jpvi.orthopoly import (
    aux_quantities,
    build_system,
    eval_poly,
    ladder_A,
    ladder_B,
    ladder_eval,
    ladder_residuals,
    orthogonality_defect,
    poly_second_derivative,
    residues,
    shifted_moment,
    shifted_moment_quad,
)

from conftest import close

MIXED = WeightParams.of("1.5", "0.5", 1, 1)


def test_first_recurrence_coefficients():
    sys = build_system(3, WeightParams.of(1, 1, 1, 0), "0.4")
    assert close(sys.alpha_rec[0], mpf(1) / 2, "1e-70")
    assert close(sys.beta_rec[1], mpf(1) / 20, "1e-70")


def test_p1_at_zero():
    sys = build_system(4, WeightParams.of(1, 1, 0, 1), 0)
    assert close(sys.p1[1], mpf(-1) / 2, "1e-70")
    al, be = sys.params.alpha, sys.params.beta
    for n in range(1, 5):
        assert close(sys.p1[n], -n * (n + al) / (2 * n + al + be), "1e-60")


def test_structure_of_the_system():
    sys = build_system(6, WeightParams.of("0.7", "2.3", 2, -1), "0.45")
    assert all(h > 0 for h in sys.h)
    assert all(b > 0 for b in sys.beta_rec[1:])
    assert all(0 <= a <= 1 for a in sys.alpha_rec)
    for n, c in enumerate(sys.coeffs):
        assert len(c) == n + 1 and c[n] == 1
    for n in range(1, 7):
        assert close(sys.p1[n], -mp.fsum(sys.alpha_rec[:n]), "1e-60")
        assert close(sys.beta_rec[n], sys.h[n] / sys.h[n - 1], "1e-60")
    assert orthogonality_defect(sys) < mpf("1e-60")


def test_polynomial_values():
    sys = build_system(3, WeightParams.of(1, 1, 1, 0), "0.5")
    assert eval_poly(sys, 0, "0.77") == (1, 0)
    assert close(eval_poly(sys, 1, 0)[0], mpf(-1) / 2, "1e-70")


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5), st.integers(-300, 300))
def test_three_term_recurrence(n, z):
    sys = build_system(6, MIXED, "0.35")
    z = mpf(z) / 100
    P = lambda j: eval_poly(sys, j, z)[0]
    defect = z * P(n) - P(n + 1) - sys.alpha_rec[n] * P(n) - sys.beta_rec[n] * P(n - 1)
    assert abs(defect) <= mpf("1e-60") * max(1, abs(z * P(n)))


def test_second_derivative_matches_coefficients():
    sys = build_system(4, MIXED, "0.35")
    z, h = mpf("0.61"), mpf("1e-20")
    fd = (eval_poly(sys, 4, z + h)[1] - eval_poly(sys, 4, z - h)[1]) / (2 * h)
    assert close(poly_second_derivative(sys, 4, z), fd, "1e-30")


def test_system_rejects_bad_input():
    with pytest.raises(DomainError):
        build_system(0, MIXED, "0.5")
    with pytest.raises(DomainError):
        build_system(3, MIXED, "1.2")


def test_aux_at_zero():
    sys = build_system(3, WeightParams.of(1, 1, 0, 1), 0)
    aux = aux_quantities(sys, 1)
    assert aux.R == 0 and aux.r == 0
    assert close(aux.y, mpf(1) / 2, "1e-70")
    assert close(aux.x, 5, "1e-70")
    for n in (2, 3):
        a = aux_quantities(sys, n)
        assert close(a.y, mpf(n * (n + 1)) / (2 * n + 2), "1e-60")


@pytest.mark.parametrize("params", [MIXED, WeightParams.of("2", "3", 1, 2), WeightParams.of("0.7", "2.3", 2, -1)])
@pytest.mark.parametrize("t", ["0.15", "0.5", "0.85"])
def test_aux_routes_agree(params, t):
    sys = build_system(5, params, t)
    for n in range(1, 5):
        aux = aux_quantities(sys, n, check=True)
        assert close(aux.x, aux.x_int, "1e-40")
        assert close(aux.y, aux.y_int, "1e-40")
        assert close(aux.x, 2 * n + 1 + params.alpha + params.beta + aux.t * aux.R, "1e-70")
        assert close(sys.p1[n], -aux.y + aux.t * aux.r, "1e-60")


def test_aux_signs_for_positive_jump():
    sys = build_system(5, WeightParams.of("2", "3", 1, 2), "0.6")
    for n in range(5):
        R, _, x, _ = residues(sys, n)
        assert R >= 0 and x >= 0


@pytest.mark.parametrize("k", [0, 3, 7])
def test_shifted_moment_two_ways(k):
    p = WeightParams.of("0.7", "2.3", 2, -1)
    t = mpf("0.45")
    assert close(shifted_moment(k, p, t), shifted_moment_quad(k, p, t), "1e-40")


def test_ladder_residue_at_the_jump():
    sys = build_system(4, MIXED, "0.5")
    aux = aux_quantities(sys, 2)
    eps = mpf("1e-40")
    z = aux.t + eps
    assert close(eps * ladder_A(aux, z), aux.R, "1e-35")
    assert close(eps * ladder_B(aux, z), aux.r, "1e-35")


def test_ladder_decay():
    sys = build_system(4, MIXED, "0.5")
    aux = aux_quantities(sys, 2)
    scaled = [abs(z * ladder_A(aux, z)) for z in (mpf(10) ** 3, mpf(10) ** 6)]
    assert scaled[1] < scaled[0] / 100
    big = mpf(10) ** 12
    assert close(big * ladder_B(aux, big), -2, "1e-10")


def test_lowering_relation():
    sys = build_system(4, MIXED, "0.5")
    res = ladder_residuals(sys, 2, "0.3")
    assert res["lowering"] <= mpf("1e-20")
    assert res["raising"] <= mpf("1e-20")


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 4), st.integers(-200, 300))
def test_ladder_relations_everywhere(n, z):
    z = mpf(z) / 100 + mpf("0.005")
    sys = build_system(5, WeightParams.of("2", "3", 1, 2), "0.35")
    data = ladder_eval(sys, n, z, check=True)
    assert data.n == n


def test_ladder_poles():
    sys = build_system(3, MIXED, "0.5")
    for z in (0, 1, "0.5"):
        with pytest.raises(PoleEvaluation):
            ladder_eval(sys, 2, z)


@pytest.mark.parametrize("n, params, t", [
    (2, MIXED, "0.3"),
    (3, WeightParams.of("2", "3", 1, 2), "0.7"),
    (4, WeightParams.of("0.7", "2.3", 2, -1), "0.5"),
])
def test_toda_equations(n, params, t):
    res = toda_residuals(n, params, t, prec=256)
    assert set(res) == {"log_h_prime", "beta_prime", "alpha_prime", "p1_prime", "y_prime_t_r_prime"}
    for r in res.values():
        assert r.rel <= mpf("1e-12"), r


@pytest.mark.parametrize("c", ["0.5", "2", "10"])
def test_scaling_leaves_the_system_alone(c):
    p = WeightParams.of("0.7", "2.3", 2, -1)
    t = mpf("0.55")
    a, b = build_system(5, p, t), build_system(5, p.scaled(c), t)
    for u, v in zip(a.alpha_rec + a.beta_rec[1:] + a.p1, b.alpha_rec + b.beta_rec[1:] + b.p1):
        assert close(u, v, "1e-60")
    for u, v in zip(a.h, b.h):
        assert close(v, mpf(c) * u, "1e-60")
    for n in range(1, 5):
        for u, v in zip(residues(a, n), residues(b, n)):
            assert close(u, v, "1e-60")


def test_moment_zero_is_the_first_norm():
    sys = build_system(2, MIXED, "0.3")
    assert close(sys.h[0], moment(0, MIXED, "0.3"), "1e-70")
