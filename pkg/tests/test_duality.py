import cmath

import numpy as np
import pytest

from cyclestab.duality import (
    AveragingSet,
    DesignError,
    build_chi,
    build_duality,
    in_stability_domain,
    inverse_roots,
    omission_test,
)
from cyclestab.poly import Poly, n_inverse, schur_test

from oracles import EX1_A, EX2_A, SQ3, chi_descending


def test_averaging_set_validation():
    with pytest.raises(DesignError):
        AveragingSet((0.5, 0.4))
    with pytest.raises(DesignError):
        AveragingSet((0.0, 1.0))
    with pytest.raises(DesignError):
        AveragingSet((1.0,), T=0)
    with pytest.raises(DesignError):
        AveragingSet(())
    d = AveragingSet.normalized([2, 1, 1], T=2)
    assert d.n == 3 and d.T == 2 and sum(d.a) == pytest.approx(1)


def test_p_reverses_order():
    d = AveragingSet((0.5, 0.3, 0.2))
    assert np.allclose(d.p().coeffs, [0.2, 0.3, 0.5])


# --- build_chi


def test_chi_example1():
    chi = build_chi(AveragingSet(EX1_A), 2)
    assert np.allclose(chi.coeffs, chi_descending(EX1_A, 2)[::-1], atol=1e-15)
    a1, a2, a3, a4 = EX1_A
    assert np.allclose(chi.coeffs, [-2 * a4, -2 * a3, -2 * a2, -2 * a1, 1])


def test_chi_example2():
    chi = build_chi(AveragingSet(EX2_A), -2)
    assert np.allclose(chi.coeffs, [2 * (2 - SQ3), 2 * (SQ3 - 1), 1], atol=1e-15)


def test_chi_single_coefficient_any_T():
    chi = build_chi(AveragingSet((1.0,), T=5), 3 - 1j)
    assert chi.allclose(Poly([-(3 - 1j), 1]))


def test_chi_rejects_zero_mu():
    with pytest.raises(DesignError):
        build_chi(AveragingSet((1.0,)), 0)


def test_chi_against_polymul_oracle():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n, T = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        a = rng.normal(size=n) + 1j * rng.normal(size=n)
        d = AveragingSet.normalized(a, T)
        mu = complex(*rng.normal(size=2) * 3)
        assert np.allclose(build_chi(d, mu).coeffs, chi_descending(d.a, mu, T)[::-1], atol=1e-12)


def test_inverse_polynomial_identity():
    # ((n-1)T+1)-inverse of chi equals 1 - z mu p*(z)^T
    rng = np.random.default_rng(6)
    for _ in range(100):
        n, T = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        d = AveragingSet.normalized(rng.normal(size=n) + 1j * rng.normal(size=n), T)
        mu = complex(*rng.normal(size=2) * 3)
        N = (n - 1) * T + 1
        lhs = n_inverse(build_chi(d, mu), N)
        b = build_duality(d)
        rhs = Poly([1.0]) - mu * Poly([0, 1]) * b.p_star**T
        assert lhs.allclose(rhs, atol=1e-12 * max(1, abs(mu)) * 10)


# --- build_duality


def test_duality_trivial():
    b = build_duality(AveragingSet((1.0,)))
    assert b.p.allclose(Poly([1]))
    assert b.q.allclose(Poly([0, 1])) and b.q_root.allclose(Poly([0, 1]))


def test_duality_suffridge2():
    b = build_duality(AveragingSet((2 / 3, 1 / 3)))
    assert b.p.allclose(Poly([1 / 3, 2 / 3]))
    assert b.q.allclose(Poly([0, 2 / 3, 1 / 3]))
    assert b.q_root.allclose(Poly([0, 2 / 3, 1 / 3]))


def test_duality_example2():
    b = build_duality(AveragingSet(EX2_A))
    assert b.q.allclose(Poly([0, SQ3 - 1, 2 - SQ3]), atol=1e-15)


def test_duality_invariants():
    rng = np.random.default_rng(9)
    theta = np.linspace(0, 2 * np.pi, 37)
    zeta = np.exp(1j * theta)
    for _ in range(100):
        n, T = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        d = AveragingSet.normalized(rng.normal(size=n) + 1j * rng.normal(size=n), T)
        b = build_duality(d)
        assert abs(b.q(1) - 1) < 1e-10 and abs(b.q_root(1) - 1) < 1e-10
        assert b.q.coeffs[0] == 0 and b.q_root.coeffs[0] == 0
        k = np.flatnonzero(b.q_root.coeffs)
        assert np.all(k % T == 1 % T)
        assert np.allclose(b.q_root(zeta) ** T, b.q(zeta**T), atol=1e-9)
        w = cmath.exp(2j * cmath.pi / T)
        assert np.allclose(b.q_root(w * zeta * 0.9), w * b.q_root(zeta * 0.9), atol=1e-12)


# --- omission_test


def test_omission_identity_outside():
    v = omission_test(Poly([0, 1]), 2)
    assert v.omitted and v.winding_zero_count == 0
    assert v.min_boundary_distance == pytest.approx(1.0)


def test_omission_identity_inside():
    v = omission_test(Poly([0, 1]), 0.5)
    assert not v.omitted and v.winding_zero_count == 1


def test_omission_example2():
    q = Poly([0, SQ3 - 1, 2 - SQ3])
    v = omission_test(q, -0.5)
    assert v.omitted
    assert schur_test(build_chi(AveragingSet(EX2_A), -2)).stable


def test_omission_on_boundary_indeterminate():
    v = omission_test(Poly([0, 1]), 1.0)
    assert not v.omitted and v.indeterminate


def test_omission_requires_q0_zero():
    with pytest.raises(ValueError):
        omission_test(Poly([1, 1]), 3)


def test_omission_counts_zeros():
    q = Poly([0, 0, 0, 1])  # z^3 covers 0.2 three times
    assert omission_test(q, 0.2).winding_zero_count == 3


# --- in_stability_domain


def test_stable_example1():
    rep = in_stability_domain(AveragingSet(EX1_A), 2)
    assert rep.stable and rep.agree


def test_stable_example2():
    rep = in_stability_domain(AveragingSet(EX2_A), -2)
    assert rep.stable and rep.agree
    assert rep.q_verdict.omitted


def test_real_design_real_mu():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n, T = int(rng.integers(1, 7)), int(rng.integers(1, 4))
        d = AveragingSet.normalized(rng.uniform(0.1, 1, n), T)
        assert not in_stability_domain(d, 1.5).stable


def test_in_stability_rejects_zero():
    with pytest.raises(DesignError):
        in_stability_domain(AveragingSet((1.0,)), 0)


def test_inverse_roots_all_branches():
    mu = -8 + 2j
    for T in (1, 2, 3, 5):
        w = inverse_roots(mu, T)
        assert len(w) == T
        assert np.allclose(w ** (-T), mu)
        assert len(np.unique(np.round(w, 12))) == T


def test_branches_and_q_side_reported():
    d = AveragingSet((0.75, 0.25), T=2)
    rep = in_stability_domain(d, -2.0)
    assert len(rep.branches) == 2
    assert rep.agree
    assert rep.stable == all(b.omitted for b in rep.branches)
