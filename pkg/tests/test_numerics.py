import math

import numpy as np
import pytest

from coincidia.errors import (
    BracketingError,
    ConfigurationError,
    DomainError,
    NumericError,
)
from coincidia.numerics import (
    MIDPOINTS,
    NODES,
    Grid,
    GridFunction,
    bracket_root,
    cell_edge_cumulative,
    cumulative_integral,
    gamma,
    integrate,
    l2_norm,
    mittag_leffler,
    sup_norm,
)


class TestGrid:
    def test_nodes_points(self):
        g = Grid(0.0, 1.0, 4, NODES)
        assert g.size == 5
        np.testing.assert_allclose(g.points(), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_midpoints_points(self):
        g = Grid(0.0, 1.0, 4, MIDPOINTS)
        assert g.size == 4
        np.testing.assert_allclose(g.points(), [0.125, 0.375, 0.625, 0.875])

    @pytest.mark.parametrize("bad", [dict(a=1.0, b=0.0), dict(n=1), dict(style="cells")])
    def test_invalid_grids(self, bad):
        kwargs = dict(a=0.0, b=1.0, n=4, style=NODES)
        kwargs.update(bad)
        with pytest.raises(ConfigurationError):
            Grid(**kwargs)


class TestGridFunction:
    def test_length_mismatch(self):
        g = Grid(0.0, 1.0, 4, NODES)
        with pytest.raises(ConfigurationError):
            GridFunction(g, np.zeros(4))

    def test_nonfinite_rejected(self):
        g = Grid(0.0, 1.0, 4, NODES)
        with pytest.raises(NumericError):
            GridFunction(g, [0.0, 1.0, np.nan, 0.0, 1.0])

    def test_values_read_only(self):
        g = Grid(0.0, 1.0, 4, NODES)
        f = GridFunction.zeros(g)
        with pytest.raises(ValueError):
            f.values[0] = 1.0

    def test_arithmetic_checks_grid(self):
        f = GridFunction.zeros(Grid(0.0, 1.0, 4, NODES))
        h = GridFunction.zeros(Grid(0.0, 1.0, 8, NODES))
        with pytest.raises(ConfigurationError):
            f + h


class TestIntegrate:
    def test_linear_exact(self):
        g = Grid(0.0, 1.0, 100, NODES)
        assert integrate(GridFunction.sample(g, lambda t: t)) == pytest.approx(0.5, abs=1e-14)

    def test_zero(self):
        for style in (NODES, MIDPOINTS):
            g = Grid(0.0, 1.0, 10, style)
            assert integrate(GridFunction.zeros(g)) == 0.0

    def test_sine(self):
        g = Grid(0.0, 1.0, 200, NODES)
        val = integrate(GridFunction.sample(g, lambda t: np.sin(np.pi * t)))
        assert val == pytest.approx(2.0 / math.pi, abs=1e-8)

    def test_odd_nodes_grid_rejected(self):
        g = Grid(0.0, 1.0, 11, NODES)
        with pytest.raises(ConfigurationError):
            integrate(GridFunction.zeros(g))

    def test_simpson_exact_for_cubics(self):
        # exactness class of the composite rule, degree <= 3 at n = 10
        g = Grid(0.0, 1.0, 10, NODES)
        rng = np.random.default_rng(0)
        for _ in range(20):
            c = rng.uniform(-2.0, 2.0, 4)
            f = GridFunction.sample(g, lambda t: c[0] + c[1] * t + c[2] * t**2 + c[3] * t**3)
            exact = c[0] + c[1] / 2 + c[2] / 3 + c[3] / 4
            assert integrate(f) == pytest.approx(exact, abs=1e-12)

    def test_midpoint_rule(self):
        g = Grid(0.0, 1.0, 1000, MIDPOINTS)
        val = integrate(GridFunction.sample(g, lambda t: t * t))
        assert val == pytest.approx(1.0 / 3.0, abs=1e-6)


class TestCumulativeIntegral:
    def test_constant_one(self):
        for style in (NODES, MIDPOINTS):
            g = Grid(0.0, 1.0, 16, style)
            F = cumulative_integral(GridFunction.constant(g, 1.0))
            np.testing.assert_allclose(F.values, g.points(), atol=1e-15)

    def test_zero(self):
        g = Grid(0.0, 1.0, 16, NODES)
        assert sup_norm(cumulative_integral(GridFunction.zeros(g))) == 0.0

    def test_quadratic_exact_on_nodes(self):
        g = Grid(0.0, 1.0, 64, NODES)
        F = cumulative_integral(GridFunction.sample(g, lambda t: 2.0 * t))
        np.testing.assert_allclose(F.values, g.points() ** 2, atol=1e-12)

    def test_starts_at_zero_on_nodes(self):
        g = Grid(0.0, 1.0, 16, NODES)
        F = cumulative_integral(GridFunction.sample(g, lambda t: np.cos(t)))
        assert F.values[0] == 0.0

    def test_final_entry_matches_integrate(self):
        g = Grid(0.0, 1.0, 64, NODES)
        f = GridFunction.sample(g, lambda t: np.exp(t) * np.sin(3 * t))
        assert cumulative_integral(f).values[-1] == pytest.approx(integrate(f), abs=1e-12)

    def test_odd_cell_count_on_nodes(self):
        g = Grid(0.0, 1.0, 15, NODES)
        F = cumulative_integral(GridFunction.sample(g, lambda t: 2.0 * t))
        np.testing.assert_allclose(F.values, g.points() ** 2, atol=1e-12)

    def test_midpoints_linear_exact(self):
        g = Grid(0.0, 1.0, 32, MIDPOINTS)
        F = cumulative_integral(GridFunction.sample(g, lambda t: t))
        np.testing.assert_allclose(F.values, g.points() ** 2 / 2.0, atol=1e-15)

    def test_cell_edges(self):
        g = Grid(0.0, 1.0, 8, MIDPOINTS)
        edges = cell_edge_cumulative(GridFunction.constant(g, 2.0))
        np.testing.assert_allclose(edges, 2.0 * np.linspace(0, 1, 9), atol=1e-15)
        with pytest.raises(ConfigurationError):
            cell_edge_cumulative(GridFunction.zeros(Grid(0.0, 1.0, 8, NODES)))


class TestNorms:
    def test_sup_norm_examples(self):
        g = Grid(0.0, 1.0, 1000, NODES)
        assert sup_norm(GridFunction.sample(g, lambda t: -np.sin(np.pi * t))) == pytest.approx(1.0, abs=1e-6)
        assert sup_norm(GridFunction.zeros(g)) == 0.0
        assert sup_norm(GridFunction.sample(g, lambda t: t - 1.0)) == pytest.approx(1.0)

    def test_l2_norm_examples(self):
        g = Grid(0.0, 1.0, 200, NODES)
        assert l2_norm(GridFunction.constant(g, 1.0)) == pytest.approx(1.0, abs=1e-12)
        assert l2_norm(GridFunction.sample(g, lambda t: t)) == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-10)
        assert l2_norm(GridFunction.sample(g, lambda t: np.sin(np.pi * t))) == pytest.approx(
            1.0 / math.sqrt(2.0), abs=1e-8
        )


class TestBracketRoot:
    def test_identity(self):
        assert bracket_root(lambda r: r, 0.3, 0.0, 1.0, 1e-12) == pytest.approx(0.3, abs=1e-11)

    def test_pendulum_comparison_root(self):
        r = bracket_root(lambda r: r - 2.0 * math.sin(r / 2.0), 1.0, 0.0, 10.0, 1e-9)
        assert r == pytest.approx(2.994600778191, abs=1e-9)

    def test_cube_root(self):
        assert bracket_root(lambda r: r**3, 8.0, 0.0, 3.0, 1e-10) == pytest.approx(2.0, abs=1e-9)

    def test_bad_bracket(self):
        with pytest.raises(BracketingError):
            bracket_root(lambda r: r, 5.0, 0.0, 1.0, 1e-9)

    def test_nonfinite_rejected(self):
        with pytest.raises(NumericError):
            bracket_root(lambda r: float("nan"), 0.0, 0.0, 1.0, 1e-9)

    def test_recovers_random_monotone_cubics(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b, c = rng.uniform(0.1, 2.0, 3)
            g = lambda r: a * r**3 + b * r + c
            r0 = rng.uniform(-3.0, 3.0)
            r = bracket_root(g, g(r0), -4.0, 4.0, 1e-10)
            assert abs(r - r0) < 1e-9


class TestGamma:
    def test_values(self):
        assert gamma(1.0) == 1.0
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        assert gamma(5.0) == 24.0

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma(0.0)
        with pytest.raises(DomainError):
            gamma(-1.5)

    def test_recurrence(self):
        rng = np.random.default_rng(11)
        for x in rng.uniform(0.5, 10.0, 100):
            assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-10)


class TestMittagLeffler:
    def test_order_one_is_exp(self):
        assert mittag_leffler(1.0, 1.0, 1e-12) == pytest.approx(math.e, abs=1e-10)
        rng = np.random.default_rng(13)
        for z in rng.uniform(-5.0, 5.0, 50):
            assert mittag_leffler(1.0, z, 1e-13) == pytest.approx(math.exp(z), abs=1e-10)

    def test_zero_argument(self):
        assert mittag_leffler(0.5, 0.0, 1e-12) == 1.0

    def test_half_order_against_series_oracle(self):
        # brute-force 200-term summation, written independently of the library
        brute = sum(1.0 / math.gamma(k / 2.0 + 1.0) for k in range(200))
        assert mittag_leffler(0.5, 1.0, 1e-14) == pytest.approx(brute, rel=1e-12)

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            mittag_leffler(1.5, 1.0, 1e-10)
        with pytest.raises(DomainError):
            mittag_leffler(0.5, 31.0, 1e-10)

    def test_divergence_guard(self):
        # q = 0.1, z = 30 needs astronomically many terms; the guard must trip
        with pytest.raises(NumericError):
            mittag_leffler(0.1, 30.0, 1e-10, max_terms=1000)
