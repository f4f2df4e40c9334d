import itertools

import numpy as np
import pytest
import sympy as sp

from torusvar.functionals import RhoPair
from torusvar.geometry import FlatTorus, Point, SingularData
from torusvar.quantization import (
    blowup_candidates,
    gamma_residual,
    global_lambda,
    global_membership,
    local_lambda,
    scalar_blowup_value,
    scalar_forbidden,
)

BASE_SET = {(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (2.0, 4.0), (4.0, 2.0), (4.0, 4.0)}


def exact_local_set(a1, a2, coordinate_bound):
    """Independent oracle: the same closure computed in exact arithmetic.

    Coordinates stay symbolic (rationals and nested radicals) end to end; the
    quadratic formula is applied exactly, with 40-digit evaluation used only to
    order, bound, and deduplicate points.  No floating-point root iteration,
    clamping, or rounding is involved."""
    a1, a2 = sp.Rational(a1), sp.Rational(a2)
    c1, c2 = 2 * (1 + a1), 2 * (1 + a2)
    bound = float(coordinate_bound)

    def num(x):
        return float(sp.sympify(x).evalf(40))

    def key(p):
        return (round(num(p[0]), 15), round(num(p[1]), 15))

    def roots_for(fixed, free_coeff, fixed_coeff):
        bq = fixed + free_coeff
        disc = sp.expand(bq**2 - 4 * (fixed**2 - fixed_coeff * fixed))
        if abs(num(disc)) < 1e-20 and sp.simplify(disc) == 0:
            return [bq / 2]
        if num(disc) < 0:
            return []
        s = sp.sqrt(disc)
        return [(bq + s) / 2, (bq - s) / 2]

    seeds = [(sp.Integer(0), sp.Integer(0)), (c1, sp.Integer(0)), (sp.Integer(0), c2),
             (c1, c1 + c2), (c1 + c2, c2), (c1 + c2, c1 + c2)]
    found = {key(p): p for p in seeds}
    work = list(seeds)
    while work:
        s1, s2 = work.pop()
        for m in itertools.count(0):  # grow the first coordinate, solve the second
            c = s1 + 2 * m
            if num(c) > bound:
                break
            for r in roots_for(c, c2, c1):
                if num(r) >= num(s2) - 1e-30 and num(r) <= bound and key((c, r)) not in found:
                    found[key((c, r))] = (c, r)
                    work.append((c, r))
        for m in itertools.count(0):  # and symmetrically
            c = s2 + 2 * m
            if num(c) > bound:
                break
            for r in roots_for(c, c1, c2):
                if num(r) >= num(s1) - 1e-30 and num(r) <= bound and key((r, c)) not in found:
                    found[key((r, c))] = (r, c)
                    work.append((r, c))
    return sorted((num(p[0]), num(p[1])) for p in found.values())


def assert_same_point_set(got, expected, tol=1e-9):
    """Tolerance-based set equality (sorting is unreliable when two points share
    a coordinate up to sub-tolerance rounding noise)."""
    assert len(got) == len(expected)
    for ref in expected:
        assert min(max(abs(g[0] - ref[0]), abs(g[1] - ref[1])) for g in got) < tol
    for g in got:
        assert min(max(abs(g[0] - ref[0]), abs(g[1] - ref[1])) for ref in expected) < tol


class TestLocalSet:
    def test_weightless_case_is_the_six_point_set(self):
        points = set(local_lambda(0.0, 0.0).points)
        assert points == BASE_SET

    def test_matches_exact_closure_with_one_heavy_point(self):
        result = local_lambda(1.0, 0.0)
        bound = max(max(p) for p in result.points)
        expected = exact_local_set(1, 0, sp.Rational(int(np.ceil(bound + 1e-6))))
        assert_same_point_set(result.points, expected)

    def test_matches_exact_closure_with_two_weights(self):
        result = local_lambda(0.5, 2.0)
        bound = max(max(p) for p in result.points)
        expected = exact_local_set(sp.Rational(1, 2), 2, sp.Rational(int(np.ceil(bound + 1e-6))))
        assert_same_point_set(result.points, expected)

    def test_every_point_sits_on_the_ellipse(self):
        for a1, a2 in itertools.product((0.0, 0.5, 1.0, 2.0), repeat=2):
            for s1, s2 in local_lambda(a1, a2).points:
                assert abs(gamma_residual(s1, s2, a1, a2)) <= 1e-12

    def test_points_are_sorted_and_distinct(self):
        points = local_lambda(1.5, 0.25).points
        assert list(points) == sorted(points)
        for p, q in itertools.combinations(points, 2):
            assert abs(p[0] - q[0]) > 1e-9 or abs(p[1] - q[1]) > 1e-9

    def test_rejects_negative_weights(self):
        with pytest.raises(ValueError):
            local_lambda(-0.5, 0.0)

    def test_origin_always_included(self):
        assert (0.0, 0.0) in local_lambda(2.0, 2.0).points

    def test_nonzero_points_drop_the_origin(self):
        ls = local_lambda(0.0, 0.0)
        assert len(ls.nonzero_points()) == len(ls.points) - 1


class TestBlowupCandidates:
    def test_regular_point_table_is_two_pi_times_base(self):
        candidates = set(blowup_candidates(SingularData.empty()))
        expected = {(2 * np.pi * a, 2 * np.pi * b) for a, b in BASE_SET if (a, b) != (0, 0)}
        assert len(candidates) == 5
        for c in candidates:
            assert min(np.hypot(c[0] - e[0], c[1] - e[1]) for e in expected) < 1e-9

    def test_marked_point_uses_its_weights(self):
        torus = FlatTorus(32)
        s = SingularData.of([(0.5, 0.5)], [1.0], [0.0], torus)
        candidates = blowup_candidates(s, 0)
        assert any(abs(c[0] - 2 * np.pi * 4.0) < 1e-9 and abs(c[1]) < 1e-9
                   for c in candidates)  # (2(1+alpha1), 0) scaled by 2 pi

    def test_out_of_range_index(self):
        with pytest.raises(IndexError):
            blowup_candidates(SingularData.empty(), 0)


class TestGlobalSet:
    def test_axis_values_are_multiples_without_weights(self):
        gs = global_lambda(SingularData.empty(), (30.0, 30.0))
        four_pi = 4 * np.pi
        for v in gs.lambda1:
            assert abs(v / four_pi - round(v / four_pi)) < 1e-9

    def test_axis_values_include_weight_shifts(self):
        torus = FlatTorus(32)
        s = SingularData.of([(0.25, 0.5)], [0.5], [0.0], torus)
        gs = global_lambda(s, (30.0, 30.0))
        assert any(abs(v - 4 * np.pi * 1.5) < 1e-9 for v in gs.lambda1)  # 4 pi (1 + a)
        assert any(abs(v - 4 * np.pi * 2.5) < 1e-9 for v in gs.lambda1)  # with n = 1

    def test_point_component_contains_the_even_lattice(self):
        gs = global_lambda(SingularData.empty(), (30.0, 30.0))
        lattice = {(round(p[0] / np.pi), round(p[1] / np.pi)) for p in gs.lambda0}
        for p, q in itertools.product((0, 2, 4), repeat=2):
            assert (2 * p, 2 * q) in lattice

    def test_membership_measures_the_gap_to_a_line(self):
        report = global_membership(RhoPair(4 * np.pi + 0.5, 1.0),
                                   SingularData.empty(), 1e-6)
        assert not report.inside
        assert report.nearest_distance == pytest.approx(0.5, abs=1e-9)
        assert report.witness[0] == "lambda1-line"

    def test_membership_detects_a_forbidden_point(self):
        report = global_membership(RhoPair(4 * np.pi, 1.0), SingularData.empty(), 1e-9)
        assert report.inside
        assert report.nearest_distance == pytest.approx(0.0, abs=1e-12)

    def test_interior_box_point_is_clear(self):
        report = global_membership(RhoPair(5 * np.pi, 5 * np.pi),
                                   SingularData.empty(), 1e-6)
        assert not report.inside
        assert report.nearest_distance == pytest.approx(np.pi, abs=1e-9)


class TestScalarTables:
    def test_forbidden_multiples_of_eight_pi(self):
        assert scalar_forbidden(RhoPair(8 * np.pi, 1.0), 1e-9)
        assert scalar_forbidden(RhoPair(1.0, 16 * np.pi + 1e-10), 1e-9)
        assert not scalar_forbidden(RhoPair(4 * np.pi, 4 * np.pi), 1e-6)

    def test_zero_is_not_forbidden(self):
        # the excluded values start at 8 pi; the origin is fine
        assert not scalar_forbidden(RhoPair(0.0, 0.0), 1e-6)

    def test_blowup_value_formula(self):
        assert scalar_blowup_value(0.0) == pytest.approx(4 * np.pi)
        assert scalar_blowup_value(1.5) == pytest.approx(10 * np.pi)

    def test_rejects_bad_tolerance(self):
        with pytest.raises(ValueError):
            scalar_forbidden(RhoPair(1.0, 1.0), 0.0)
