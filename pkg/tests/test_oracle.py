import math
from fractions import Fraction

import numpy as np
import pytest

from covdev import (
    ProfileFamily,
    ResourceLimitError,
    VarianceProfile,
    diag_trace_moment,
    full_trace_moment,
    generate,
    joint_moment,
    load_profile,
    offdiag_trace_moment,
    trace_moment_via_shapes,
)

from conftest import naive_diag_p2, naive_offdiag_p2, rational_profile

B2212 = load_profile("1,2\n3,4", format="csv")


def hermite_joint_moment(n, m):
    """Independent quadrature oracle: E g^n (g^2-1)^m via Gauss-Hermite nodes
    for the standard normal weight (exact for polynomial integrands)."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(60)
    vals = nodes**n * (nodes**2 - 1) ** m
    return float(weights @ vals) / math.sqrt(2 * math.pi)


class TestJointMoment:
    def test_known_values(self):
        assert joint_moment(0, 1) == 0
        assert joint_moment(0, 2) == 2
        assert joint_moment(2, 1) == 2
        assert joint_moment(0, 3) == 8
        assert joint_moment(4, 0) == 3
        assert joint_moment(0, 0) == 1

    def test_zero_set_up_to_8(self):
        for n in range(9):
            for m in range(9):
                a = joint_moment(n, m)
                assert a >= 0
                assert (a == 0) == (n % 2 == 1 or (n, m) == (0, 1))

    def test_against_quadrature(self):
        for n in range(7):
            for m in range(7):
                a = joint_moment(n, m)
                q = hermite_joint_moment(n, m)
                assert abs(a - q) <= 1e-8 * max(1.0, abs(q))

    def test_negative_orders_rejected(self):
        with pytest.raises(ValueError):
            joint_moment(-1, 0)


class TestOffdiagMoment:
    def test_p1_zero(self):
        assert offdiag_trace_moment(B2212, 1).value == 0

    def test_anchor_146(self):
        m = offdiag_trace_moment(B2212, 2)
        assert m.value == Fraction(146)
        assert m.kind == "offdiag" and m.p == 2

    def test_constant_3x2(self):
        B = generate(ProfileFamily.constant(), 3, 2)
        assert offdiag_trace_moment(B, 2).value == 12

    def test_p2_closed_form_random(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            B = rational_profile(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            assert offdiag_trace_moment(B, 2).value == naive_offdiag_p2(B)

    def test_float_mode(self):
        Bf = VarianceProfile(((1.0, 2.0), (3.0, 4.0)), exact=False)
        assert abs(offdiag_trace_moment(Bf, 2).value - 146.0) < 1e-9

    def test_work_cap(self):
        B = generate(ProfileFamily.constant(), 4, 4)
        with pytest.raises(ResourceLimitError):
            offdiag_trace_moment(B, 6, cap=10**5)


class TestDiagMoment:
    def test_p1_zero(self):
        assert diag_trace_moment(B2212, 1).value == 0

    def test_anchor_708(self):
        assert diag_trace_moment(B2212, 2).value == Fraction(708)

    def test_single_entry_p3(self):
        B = load_profile("1", format="csv")
        assert diag_trace_moment(B, 3).value == 8  # E (g^2-1)^3

    def test_p2_closed_form_random(self):
        rng = np.random.default_rng(22)
        for _ in range(30):
            B = rational_profile(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            assert diag_trace_moment(B, 2).value == naive_diag_p2(B)

    def test_p3_closed_form_random(self):
        # third central moment: only the pure cubes survive, coefficient a_{0,3} = 8
        rng = np.random.default_rng(23)
        for _ in range(20):
            B = rational_profile(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            expect = 8 * sum(x**6 for row in B.entries for x in row)
            assert diag_trace_moment(B, 3).value == expect

    def test_matches_brute_force_cell_expansion(self):
        # independent route: expand (sum_j c_j Y_j)^p over all index tuples
        # with Y = g^2 - 1 and per-cell joint moments
        from itertools import product as iproduct

        rng = np.random.default_rng(24)
        for _ in range(10):
            d, n = int(rng.integers(1, 3)), int(rng.integers(1, 4))
            B = rational_profile(rng, d, n)
            for p in (2, 3, 4):
                expect = Fraction(0)
                for i in range(d):
                    row = B.entries[i]
                    for tup in iproduct(range(n), repeat=p):
                        coef = Fraction(1)
                        counts = {}
                        for j in tup:
                            coef *= row[j] ** 2
                            counts[j] = counts.get(j, 0) + 1
                        term = Fraction(1)
                        for j, c in counts.items():
                            term *= joint_moment(0, c)
                        expect += coef * term
                assert diag_trace_moment(B, p).value == expect


class TestFullMoment:
    def test_p1_zero(self):
        assert full_trace_moment(B2212, 1).value == 0

    def test_anchor_854(self):
        assert full_trace_moment(B2212, 2).value == Fraction(854)

    def test_p2_decomposition_random(self):
        rng = np.random.default_rng(25)
        for _ in range(20):
            B = rational_profile(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            assert (
                full_trace_moment(B, 2).value
                == offdiag_trace_moment(B, 2).value + diag_trace_moment(B, 2).value
            )

    def test_even_p_nonnegative(self):
        rng = np.random.default_rng(26)
        for _ in range(10):
            B = rational_profile(rng, 2, 2)
            assert full_trace_moment(B, 2).value >= 0
            assert full_trace_moment(B, 4).value >= 0

    def test_1x1_matches_central_moments(self):
        B = load_profile("1", format="csv")
        for p in (1, 2, 3, 4, 5):
            assert full_trace_moment(B, p).value == joint_moment(0, p)


class TestMomentProperties:
    def test_homogeneity(self):
        rng = np.random.default_rng(27)
        t = Fraction(5, 3)
        for _ in range(10):
            B = rational_profile(rng, 2, 3)
            Bt = B.scaled(t)
            for p in (1, 2, 3):
                for fn in (offdiag_trace_moment, diag_trace_moment, full_trace_moment):
                    assert fn(Bt, p).value == t ** (2 * p) * fn(B, p).value

    def test_permutation_invariance(self):
        rng = np.random.default_rng(28)
        for _ in range(10):
            d, n = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            B = rational_profile(rng, d, n)
            rp = list(rng.permutation(d))
            cp = list(rng.permutation(n))
            BP = VarianceProfile(
                tuple(tuple(B.entries[i][j] for j in cp) for i in rp), exact=True
            )
            for p in (2, 3):
                for fn in (offdiag_trace_moment, diag_trace_moment, full_trace_moment):
                    assert fn(B, p).value == fn(BP, p).value

    def test_diag_two_sided_window(self):
        from covdev import compute_schatten_params

        rng = np.random.default_rng(29)
        for _ in range(15):
            B = rational_profile(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            if B.is_zero:
                continue
            for p in (2, 4):
                Q = compute_schatten_params(B, p)
                denom = math.sqrt(p) * Q.sigma_bar_p + p * Q.b_p**2
                if denom == 0:
                    continue
                ratio = float(diag_trace_moment(B, p).value) ** (1 / p) / denom
                assert 0.1 <= ratio <= 10.0

    def test_shape_sum_equivalence(self):
        rng = np.random.default_rng(30)
        for _ in range(10):
            B = rational_profile(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
            for p in (1, 2, 3, 4):
                assert trace_moment_via_shapes(B, p) == offdiag_trace_moment(B, p).value
