import math

import numpy as np
import pytest

from central_configs.centrality import cc_residuals_four, classify, cross, lambda_fit
from central_configs.exceptions import DomainError, InvalidMassError, RootNotBracketedError
from central_configs.families import FamilyShape, TrapeziumShape, build_family
from central_configs.families import kite, trapezium
from central_configs.families.simplex import build_equilateral_centered, build_tetrahedron
from central_configs.pairspace import Configuration, Masses

PI = math.pi
DEG = PI / 180


def assert_central(instance, oracle_tol=1e-7, residual_tol=1e-9):
    fit = lambda_fit(instance.configuration, instance.masses)
    assert fit.max_relative_deviation < oracle_tol
    assert cc_residuals_four(instance.configuration, instance.masses).max_normalized < residual_tol


def interior_samples(region, rng, count, margin=0.01):
    """(alpha, beta) drawn uniformly from the quadrant, kept when a margin-sized box stays admissible"""
    samples = []
    while len(samples) < count:
        a, b = rng.uniform(0.0, PI / 2, 2)
        box = [(a + da, b + db) for da in (-margin, 0.0, margin) for db in (-margin, 0.0, margin)]
        if all(region(x, y) for x, y in box):
            samples.append((float(a), float(b)))
    return samples


class TestShapes:
    def test_aliases_resolve(self):
        assert FamilyShape("kite-convex", 0.9, 0.7).kind == "KiteConvex"

    def test_unknown_family(self):
        with pytest.raises(DomainError, match="Unknown family"):
            FamilyShape("pentagon")

    def test_scale_must_be_positive(self):
        with pytest.raises(DomainError):
            FamilyShape("Rhombus", PI / 4, scale=0.0)

    def test_mass_ratio_must_be_positive(self):
        with pytest.raises(InvalidMassError):
            FamilyShape("Rhombus", mass_ratios={"m1/m2": -1.0})

    def test_kite_needs_both_angles(self):
        with pytest.raises(DomainError, match="both alpha and beta"):
            build_family(FamilyShape("KiteConvex", 50 * DEG))

    def test_rhombus_needs_angle_or_ratio(self):
        with pytest.raises(DomainError):
            build_family(FamilyShape("Rhombus"))

    def test_instance_dict(self, convex_kite):
        data = convex_kite.to_dict()
        assert data["family"]["kind"] == "KiteConvex"
        assert data["masses"][1] == data["masses"][2] == 1.0

    def test_scale_sets_first_distance(self):
        instance = build_family(FamilyShape("KiteConvex", 50 * DEG, 40 * DEG, scale=2.5))
        assert instance.configuration.distance_matrix()[0, 1] == pytest.approx(2.5, rel=1e-12)


class TestTetrahedron:
    def test_all_edges_equal(self):
        config = build_tetrahedron(Masses((1.0, 1.0, 1.0, 1.0)), 1.7)
        dist = config.distance_matrix()
        assert np.allclose(dist[np.triu_indices(4, 1)], 1.7, rtol=1e-14)

    def test_central_for_any_masses(self, rng):
        edge = 1.7
        config = build_tetrahedron(Masses((1.0, 1.0, 1.0, 1.0)), edge)
        for _ in range(50):
            masses = Masses(tuple(rng.uniform(0.1, 10.0, 4)))
            fit = lambda_fit(config, masses)
            assert fit.lam == pytest.approx(masses.total / edge ** 3, rel=1e-12)
            assert fit.max_relative_deviation < 1e-12

    def test_needs_four_masses(self):
        with pytest.raises(DomainError):
            build_tetrahedron(Masses((1.0, 1.0, 1.0)))


class TestEquilateralCentered:
    def test_lambda_for_any_masses(self, rng):
        for _ in range(50):
            m, m4 = rng.uniform(0.1, 10.0, 2)
            side = 1.3
            config = build_equilateral_centered(m, m4, side)
            fit = lambda_fit(config, Masses((m, m, m, m4)))
            assert fit.lam == pytest.approx((3 * m + 3 ** 1.5 * m4) / side ** 3, rel=1e-12)
            assert fit.is_central

    def test_center_at_centroid(self):
        config = build_equilateral_centered(1.0, 2.0, 1.0)
        np.testing.assert_allclose(config.positions[:3].mean(axis=0), config.positions[3], atol=1e-15)

    def test_build_family_reads_center_ratio(self):
        instance = build_family(FamilyShape("equilateral", mass_ratios={"m4/m1": 3.0}))
        assert instance.masses.m == (1.0, 1.0, 1.0, 3.0)
        assert_central(instance)


class TestConvexKite:
    @pytest.mark.parametrize("alpha, beta, expected", [
        (50 * DEG, 40 * DEG, True),
        (40 * DEG, 30 * DEG, True),
        (70 * DEG, 40 * DEG, False),
        (20 * DEG, 20 * DEG, False),
    ])
    def test_region(self, alpha, beta, expected):
        assert kite.kite_convex_region(alpha, beta) is expected

    def test_mass_ratios(self):
        m1, m4 = kite.kite_convex_mass_ratios(50 * DEG, 40 * DEG)
        assert m1 == pytest.approx(1.8343862, rel=1e-6)
        assert m4 == pytest.approx(0.49977106, rel=1e-6)

    def test_swapping_angles_swaps_ratios(self, rng):
        for a, b in interior_samples(kite.kite_convex_region, rng, 20):
            m1, m4 = kite.kite_convex_mass_ratios(a, b)
            swapped = kite.kite_convex_mass_ratios(b, a)
            assert swapped == pytest.approx((m4, m1), rel=1e-14)

    def test_singular_point(self):
        with pytest.raises(DomainError, match="singular"):
            kite.kite_convex_mass_ratios(PI / 6, PI / 6)

    def test_outside_lists_violations(self):
        with pytest.raises(DomainError) as info:
            kite.kite_convex_mass_ratios(70 * DEG, 40 * DEG)
        assert "requires alpha < pi/3" in info.value.violations

    def test_distances(self, convex_kite):
        a, b = 50 * DEG, 40 * DEG
        d = convex_kite.configuration.distances()
        assert d.q_of(0, 1) == pytest.approx(1.0, rel=1e-12)
        assert d.q_of(0, 2) == pytest.approx(1.0, rel=1e-12)
        assert d.q_of(1, 2) == pytest.approx(2 * math.cos(a), rel=1e-12)
        assert d.q_of(1, 3) == pytest.approx(math.cos(a) / math.cos(b), rel=1e-12)
        assert d.q_of(0, 3) == pytest.approx(math.sin(a + b) / math.cos(b), rel=1e-12)

    def test_central(self, convex_kite):
        assert_central(convex_kite)

    def test_region_sweep_is_central(self, rng):
        for a, b in interior_samples(kite.kite_convex_region, rng, 200):
            assert_central(build_family(FamilyShape("KiteConvex", a, b)))

    def test_crossing_a_boundary_breaks_the_masses(self, rng):
        points = []
        for _ in range(50):
            eps = rng.uniform(1e-6, 1e-3)
            t = rng.uniform(PI / 12 + 0.02, PI / 3 - 0.02)
            points.append((PI / 3 + eps, t))
            points.append((t, PI / 3 + eps))
            s = rng.uniform(PI / 6 + 0.02, PI / 3 - 0.02)
            points.append((s - eps / math.sqrt(5), (PI / 2 - s) / 2 - 2 * eps / math.sqrt(5)))
            points.append(((PI / 2 - s) / 2 - 2 * eps / math.sqrt(5), s - eps / math.sqrt(5)))
        for a, b in points:
            with pytest.raises(DomainError):
                kite.kite_convex_mass_ratios(a, b)
            ratios = (kite._convex_ratio(a, b), kite._convex_ratio(b, a))
            assert min(ratios) <= 0 or not all(math.isfinite(r) for r in ratios)

    def test_angles_from_ratios(self):
        m1, m4 = kite.kite_convex_mass_ratios(50 * DEG, 40 * DEG)
        alpha, beta = kite.kite_convex_angles(m1, m4)
        assert alpha == pytest.approx(50 * DEG, abs=1e-7)
        assert beta == pytest.approx(40 * DEG, abs=1e-7)

    def test_angles_from_negative_ratio(self):
        with pytest.raises(DomainError):
            kite.kite_convex_angles(-1.0, 1.0)


class TestConcaveKite:
    @pytest.mark.parametrize("alpha, beta, expected", [
        (50 * DEG, 5 * DEG, True),
        (70 * DEG, 55 * DEG, True),
        (40 * DEG, 20 * DEG, False),
        (30 * DEG, 10 * DEG, False),
    ])
    def test_region(self, alpha, beta, expected):
        assert kite.kite_concave_region(alpha, beta) is expected

    @pytest.mark.parametrize("alpha, beta, m1, m4", [
        (50 * DEG, 5 * DEG, 0.286855, 1.2336),
        (70 * DEG, 55 * DEG, 0.348748, 1.43458),
    ])
    def test_mass_ratios(self, alpha, beta, m1, m4):
        assert kite.kite_concave_mass_ratios(alpha, beta) == pytest.approx((m1, m4), rel=1e-4)

    def test_equal_angles_rejected(self):
        with pytest.raises(DomainError, match="on top of each other"):
            kite.kite_concave_mass_ratios(0.9, 0.9)

    def test_body_four_inside_triangle(self, concave_kite):
        r = concave_kite.configuration.positions
        signs = [cross(r[j] - r[i], r[3] - r[i]) for i, j in ((0, 1), (1, 2), (2, 0))]
        assert all(s > 0 for s in signs) or all(s < 0 for s in signs)

    def test_central(self, concave_kite):
        assert_central(concave_kite)
        assert classify(concave_kite.configuration).kind == "KiteConcave"

    def test_mirror_branch_relabels(self, concave_kite):
        mirrored = build_family(FamilyShape("KiteConcave", 5 * DEG, 50 * DEG))
        np.testing.assert_allclose(mirrored.configuration.positions,
                                   concave_kite.configuration.positions[[3, 1, 2, 0]])
        assert mirrored.masses.m == pytest.approx(concave_kite.masses.m[::-1])
        assert_central(mirrored)

    def test_region_sweep_is_central(self, rng):
        for a, b in interior_samples(kite.kite_concave_region, rng, 200):
            assert_central(build_family(FamilyShape("KiteConcave", a, b)))

    def test_points_outside_rejected(self, rng):
        for a, b in rng.uniform(0.0, PI / 2, size=(500, 2)):
            if not kite.kite_concave_region(a, b) and not math.isclose(a, b):
                with pytest.raises(DomainError):
                    kite.kite_concave_mass_ratios(a, b)

    def test_crossing_a_boundary_breaks_the_masses(self, rng):
        points = []
        for _ in range(50):
            eps = rng.uniform(1e-6, 1e-3)
            low = rng.uniform(46 * DEG, 59 * DEG)
            points.append((low, 2 * low - PI / 2 + eps))
            high = rng.uniform(61 * DEG, 74 * DEG)
            points.append((high, 2 * high - PI / 2 - eps))
            points.append((PI / 3 + eps, rng.uniform(1 * DEG, 29 * DEG)))
            points.append((rng.uniform(62 * DEG, 74 * DEG), PI / 3 + eps))
        for a, b in points:
            assert not kite.kite_concave_region(a, b)
            with pytest.raises(DomainError):
                kite.kite_concave_mass_ratios(a, b)
            ratios = kite._concave_ratios(a, b)
            assert min(ratios) <= 0 or not all(math.isfinite(r) for r in ratios)


class TestRhombus:
    def test_square(self):
        assert kite.rhombus_ratio(PI / 4) == pytest.approx(1.0, abs=1e-14)

    def test_matches_kite_formula(self):
        for alpha in np.linspace(PI / 6 + 0.01, PI / 3 - 0.01, 25):
            m1, m4 = kite.kite_convex_mass_ratios(alpha, alpha)
            assert m1 == pytest.approx(kite.rhombus_ratio(alpha), rel=1e-10)
            assert m4 == pytest.approx(m1, rel=1e-10)

    def test_limits(self):
        assert kite.rhombus_ratio(PI / 6 + 1e-9) > 1e6
        assert kite.rhombus_ratio(PI / 3 - 1e-9) < 1e-6

    def test_strictly_decreasing(self):
        values = [kite.rhombus_ratio(a) for a in np.linspace(PI / 6 + 1e-6, PI / 3 - 1e-6, 10_000)]
        assert np.all(np.diff(values) < 0)

    def test_inverse(self):
        alpha = 0.3 * PI
        assert kite.rhombus_angle(kite.rhombus_ratio(alpha)) == pytest.approx(alpha, abs=1e-10)

    @pytest.mark.parametrize("alpha", [PI / 6, PI / 3, 0.1])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            kite.rhombus_ratio(alpha)

    @pytest.mark.parametrize("ratio", [0.0, -1.0, math.inf])
    def test_inverse_domain(self, ratio):
        with pytest.raises(DomainError):
            kite.rhombus_angle(ratio)

    def test_build_from_unit_ratio(self):
        instance = build_family(FamilyShape("rhombus", mass_ratios={"m1/m2": 1.0}))
        assert instance.shape.alpha == pytest.approx(PI / 4, abs=1e-12)
        d = instance.configuration.distances()
        sides = [d.q_of(0, 1), d.q_of(0, 2), d.q_of(1, 3), d.q_of(2, 3)]
        assert max(sides) - min(sides) < 1e-12
        assert_central(instance)

    def test_region_sweep_is_central(self, rng):
        for alpha in rng.uniform(PI / 6 + 0.01, PI / 3 - 0.01, 200):
            instance = build_family(FamilyShape("Rhombus", float(alpha)))
            assert_central(instance)
            assert classify(instance.configuration).kind == "Rhombus"


class TestTrapezium:
    def test_beta_interval(self):
        lo, hi = trapezium.beta_interval(75 * DEG)
        assert lo == pytest.approx(22.5 * DEG)
        assert hi == pytest.approx(37.5 * DEG)

    @pytest.mark.parametrize("alpha", [PI / 3, PI / 2, 50 * DEG])
    def test_no_interval_outside_base_range(self, alpha):
        with pytest.raises(DomainError):
            trapezium.beta_interval(alpha)
        assert not any(trapezium.trapezium_region(alpha, b) for b in np.linspace(0.01, PI / 2 - 0.01, 50))

    def test_region_rejects_wide_beta(self):
        assert trapezium.trapezium_violations(80 * DEG, 50 * DEG) == ["requires beta < alpha/2"]

    def test_crossing_a_boundary_breaks_the_masses(self, rng):
        points = []
        for _ in range(50):
            eps = rng.uniform(1e-6, 1e-3)
            wide = rng.uniform(73 * DEG, 89 * DEG)
            points.append((wide, wide / 2 + eps))
            steep = rng.uniform(61 * DEG, 71 * DEG)
            points.append((steep, 3 * steep - PI + eps))
            narrow = rng.uniform(61 * DEG, 89 * DEG)
            points.append((narrow, (3 * narrow - PI) / 2 - eps))
        for a, b in points:
            assert not trapezium.trapezium_region(a, b)
            with pytest.raises(DomainError):
                trapezium.trapezium_mass_ratio(a, b)
            quotients = trapezium._angle_quotients(a, b)
            assert min(quotients) <= 0 or not all(math.isfinite(q) for q in quotients)

    def test_angle_quotients_agree_on_the_curve(self):
        alpha = 75 * DEG
        first, second = trapezium._angle_quotients(alpha, trapezium.trapezium_beta(alpha))
        assert first == pytest.approx(second, rel=1e-9)

    @pytest.mark.parametrize("alpha_deg, beta_deg, ratio", [
        (70, 18.100136, 0.03648016),
        (75, 26.004856, 0.11342286),
        (80, 33.177139, 0.26115747),
        (85, 39.535960, 0.52525056),
    ])
    def test_solution_curve(self, alpha_deg, beta_deg, ratio):
        beta = trapezium.trapezium_beta(alpha_deg * DEG)
        assert beta / DEG == pytest.approx(beta_deg, abs=1e-5)
        assert trapezium.trapezium_mass_ratio(alpha_deg * DEG, beta) == pytest.approx(ratio, rel=1e-6)

    def test_single_sign_change(self):
        for alpha in np.linspace(PI / 3 + 0.01, PI / 2 - 0.01, 20):
            assert len(trapezium.trapezium_brackets(float(alpha))) == 1

    def test_solution_satisfies_angle_inequalities(self):
        alpha = 75 * DEG
        beta = trapezium.trapezium_beta(alpha)
        assert math.sin(alpha - beta) > math.sin(beta)
        assert math.sin(2 * alpha - beta) > math.sin(alpha - beta)

    def test_off_curve_warns(self, caplog):
        with caplog.at_level("WARNING"):
            ratio = trapezium.trapezium_mass_ratio(75 * DEG, 30 * DEG)
        assert ratio > 0
        assert "off the trapezium solution curve" in caplog.text

    def test_equal_legs_and_diagonals(self, trapezium_75):
        d = trapezium_75.configuration.distances()
        assert d.q_of(0, 1) == pytest.approx(d.q_of(2, 3), rel=1e-12)
        assert d.q_of(0, 2) == pytest.approx(d.q_of(1, 3), rel=1e-12)
        assert d.q_of(0, 3) > d.q_of(1, 2)

    def test_heights(self, trapezium_75):
        shape = trapezium_75.shape
        assert isinstance(shape, TrapeziumShape)
        alpha, beta = shape.alpha, shape.beta
        d = trapezium_75.configuration.distances()
        r = trapezium_75.configuration.positions
        h1, h2 = shape.heights
        assert h1 == pytest.approx(r[1, 1] - r[0, 1], rel=1e-12)
        assert h1 == pytest.approx(d.q_of(0, 2) * math.sin(alpha - beta), rel=1e-12)
        assert h2 == pytest.approx(d.q_of(1, 2) * math.sin(alpha - beta), rel=1e-12)

    def test_central(self, trapezium_75):
        assert_central(trapezium_75)
        assert trapezium_75.masses.m[1] == trapezium_75.masses.m[2]

    def test_region_sweep_is_central(self, rng):
        for alpha in rng.uniform(PI / 3 + 0.01, PI / 2 - 0.01, 200):
            assert_central(build_family(FamilyShape("IsoscelesTrapezium", float(alpha))))

    def test_angles_from_ratio(self):
        alpha, beta = trapezium.trapezium_angles(0.5)
        assert alpha / DEG == pytest.approx(84.6285239, abs=1e-5)
        assert beta / DEG == pytest.approx(39.0934921, abs=1e-5)
        assert trapezium.trapezium_mass_ratio(alpha, beta) == pytest.approx(0.5, rel=1e-9)

    def test_build_from_ratio(self):
        instance = build_family(FamilyShape("trapezium", mass_ratios={"m2/m1": 0.5}))
        assert instance.masses.m == pytest.approx((1.0, 0.5, 0.5, 1.0), rel=1e-9)
        assert_central(instance)

    @pytest.mark.parametrize("ratio", [1.0 + 1e-6, 2.0])
    def test_heavier_inner_masses_unreachable(self, ratio):
        with pytest.raises(RootNotBracketedError):
            trapezium.trapezium_angles(ratio)

    def test_equal_masses_solve_to_square(self):
        alpha, beta = trapezium.trapezium_angles(1.0)
        assert (alpha, beta) == (PI / 2, PI / 4)
        assert trapezium.trapezium_mass_ratio(alpha, beta) == 1.0

        instance = build_family(FamilyShape("trapezium", mass_ratios={"m2/m1": 1.0}))
        assert instance.masses.m == (1.0, 1.0, 1.0, 1.0)
        assert instance.shape.limit == "square"
        assert instance.to_dict()["family"]["limit"] == "square"
        d = instance.configuration.distances()
        sides = [d.q_of(0, 1), d.q_of(1, 2), d.q_of(2, 3), d.q_of(0, 3)]
        assert max(sides) - min(sides) < 1e-12
        assert d.q_of(0, 2) == pytest.approx(math.sqrt(2), rel=1e-12)
        assert_central(instance)

    def test_interior_trapezium_has_no_limit_mark(self, trapezium_75):
        assert trapezium_75.shape.limit is None
        assert "limit" not in trapezium_75.to_dict()["family"]

    def test_ratio_approaches_square_limit(self):
        alphas = np.linspace(PI / 3 + 0.01, PI / 2 - 1e-3, 30)
        ratios = [trapezium.trapezium_mass_ratio(a, trapezium.trapezium_beta(a)) for a in alphas]
        assert np.all(np.diff(ratios) > 0)
        assert ratios[-1] > 0.99


class TestParallelogram:
    def test_rhombus_passes(self):
        instance = build_family(FamilyShape("Rhombus", 40 * DEG))
        result = trapezium.parallelogram_check(instance.configuration, instance.masses)
        assert result["parallelogram"] and result["rhombus"] and result["central"]
        assert result["consistent"]

    def test_square_with_equal_masses(self, square):
        result = trapezium.parallelogram_check(*square)
        assert result["note"] == "central rhombus"

    def test_non_parallelogram(self, non_central):
        result = trapezium.parallelogram_check(*non_central)
        assert not result["parallelogram"]

    def test_non_rhombic_parallelograms_are_not_central(self, rng):
        for b in np.linspace(0.3, 0.8, 20):
            for theta in np.linspace(30 * DEG, 90 * DEG, 20):
                u = np.array([1.0, 0.0])
                v = b * np.array([math.cos(theta), math.sin(theta)])
                config = Configuration([np.zeros(2), u, u + v, v])
                for _ in range(20):
                    result = trapezium.parallelogram_check(config, Masses(tuple(rng.uniform(0.5, 2.0, 4))))
                    assert result["parallelogram"] and not result["rhombus"]
                    assert not result["central"]
                    assert result["deviation"] > 1e-4
                    assert result["consistent"]
