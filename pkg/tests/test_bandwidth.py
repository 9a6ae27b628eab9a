import numpy as np
import pytest
from numpy.testing import assert_allclose

from bddist.bandwidth import (
    Fixed,
    KinkAdaptive,
    MsePilot,
    RuleOfThumb,
    candidate_bandwidths,
    data_diameter,
    kink_adaptive_bandwidth,
    mse_pilot_bandwidth,
    mse_pilot_objective,
    resolve_bandwidths,
    rot_bandwidth,
    rot_bandwidth_from_scale,
    rot_scale,
    univariate_rescale,
)
from bddist.data import Sample
from bddist.errors import BandwidthSelectionError, InvalidInputError
from bddist.geometry import BoundaryPolyline, QuadrantRule, make_grid

RULE = QuadrantRule()


def square_sample(rng, n=2500, mean_fn=None, noise=1.0):
    x = rng.uniform(-1, 1, (n, 2))
    y = noise * rng.normal(size=n)
    if mean_fn is not None:
        y = y + mean_fn(x)
    return Sample.from_data(y, x, RULE)


class TestRuleOfThumb:
    def test_formula_examples(self):
        assert_allclose(rot_bandwidth_from_scale(1.0, 1.0, 10000), 0.1)
        assert_allclose(rot_bandwidth_from_scale(2.0, 1.0, 10000), 0.2)
        assert_allclose(rot_bandwidth_from_scale(1.0, 1.0, 625), 0.2)

    def test_sixteenfold_n_halves_h(self):
        h1 = rot_bandwidth_from_scale(1.3, 1.0, 500)
        h2 = rot_bandwidth_from_scale(1.3, 1.0, 8000)
        assert_allclose(h2, h1 / 2.0)

    def test_exponent_override(self):
        assert_allclose(rot_bandwidth_from_scale(1.0, 1.0, 1000, exponent=1 / 3),
                        1000 ** (-1 / 3))

    def test_scale_is_sd_of_boundary_distance(self):
        rng = np.random.default_rng(0)
        sample = square_sample(rng, n=400)
        pl = BoundaryPolyline.from_vertices([(0.0, 1.0), (0.0, 0.0), (1.0, 0.0)])
        c = rot_scale(sample, pl)
        assert_allclose(c, np.std(pl.distance_to(sample.x), ddof=1), rtol=1e-12)
        assert_allclose(rot_bandwidth(sample, pl, c0=2.0),
                        2.0 * c * 400 ** -0.25, rtol=1e-12)

    def test_degenerate_scale_rejected(self):
        pl = BoundaryPolyline(np.array([[0.0, 0.0], [1.0, 0.0]]))
        x = np.tile([[0.5, 0.3]], (5, 1))
        sample = Sample(np.arange(5.0), x, np.ones(5, bool))
        with pytest.raises(InvalidInputError):
            rot_bandwidth(sample, pl)


class TestKinkAdaptive:
    PL = BoundaryPolyline.from_vertices([(0.0, 2.0), (0.0, 0.0), (2.0, 0.0)])

    def test_kink_distance_binds(self):
        h = kink_adaptive_bandwidth((0.3, 0.0), self.PL, h_mse=0.5, rot_h=0.1)
        assert_allclose(h, 0.3)

    def test_floor_binds(self):
        h = kink_adaptive_bandwidth((0.05, 0.0), self.PL, h_mse=0.5, rot_h=0.1)
        assert_allclose(h, 0.1)

    def test_cap_binds(self):
        h = kink_adaptive_bandwidth((0.8, 0.0), self.PL, h_mse=0.5, rot_h=0.1)
        assert_allclose(h, 0.5)

    def test_no_kinks_returns_pilot(self):
        straight = BoundaryPolyline(np.array([[0.0, 0.0], [2.0, 0.0]]))
        assert kink_adaptive_bandwidth((0.5, 0.0), straight, 0.37, 0.1) == 0.37

    def test_output_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            h_mse = rng.uniform(0.05, 2.0)
            rot_h = rng.uniform(0.05, 2.0)
            pt = rng.uniform(0, 2, 2)
            h = kink_adaptive_bandwidth(pt, self.PL, h_mse, rot_h)
            assert min(rot_h, h_mse) - 1e-12 <= h <= h_mse + 1e-12


class TestUnivariateRescale:
    def test_p1(self):
        assert_allclose(univariate_rescale(1.0, 1, 10 ** 5), 10 ** (5 / 30), rtol=1e-12)

    def test_p0(self):
        assert_allclose(univariate_rescale(0.5, 0, 10 ** 4), 0.5 * 10 ** (4 / 12),
                        rtol=1e-12)

    def test_n_one_unchanged(self):
        assert univariate_rescale(0.8, 3, 1) == 0.8


class TestMsePilot:
    def test_noise_only_selects_largest(self):
        # Constant effect: the objective is variance-dominated, which is
        # decreasing in h for the uniform kernel, so the largest candidate wins.
        rng = np.random.default_rng(2)
        sample = square_sample(rng, n=2500, noise=1.0)
        H = candidate_bandwidths(sample, (0.0, 0.0), RULE, num=8)
        h = mse_pilot_bandwidth(sample, (0.0, 0.0), RULE, "uniform", 1,
                                candidates=H)
        assert h == H[-1]

    def test_strong_curvature_zero_noise_selects_smallest(self):
        rng = np.random.default_rng(3)

        def curved(x):
            d = np.hypot(x[:, 0], x[:, 1])
            return 25.0 * d * d * np.where(RULE.contains(x), 1.0, -1.0)

        sample = square_sample(rng, n=4000, mean_fn=curved, noise=0.0)
        H = candidate_bandwidths(sample, (0.0, 0.0), RULE, num=8)
        h = mse_pilot_bandwidth(sample, (0.0, 0.0), RULE, "uniform", 1,
                                candidates=H)
        assert h == H[0]

    def test_matches_fine_grid_scan(self):
        rng = np.random.default_rng(4)

        def gentle(x):
            d = np.hypot(x[:, 0], x[:, 1])
            return 1.5 * d * d * np.where(RULE.contains(x), 1.0, 0.0)

        sample = square_sample(rng, n=3000, mean_fn=gentle, noise=0.4)
        H = candidate_bandwidths(sample, (0.0, 0.0), RULE, num=10)
        h = mse_pilot_bandwidth(sample, (0.0, 0.0), RULE, "uniform", 1,
                                candidates=H)
        fine = np.geomspace(H[0], H[-1], 100)
        objs = []
        for hf in fine:
            try:
                objs.append(mse_pilot_objective(sample, (0.0, 0.0), RULE,
                                                "uniform", 1, float(hf)))
            except Exception:
                objs.append(np.inf)
        best_fine = fine[int(np.argmin(objs))]
        spacing = np.log(H[1] / H[0])
        assert abs(np.log(h / best_fine)) <= spacing + 1e-9

    def test_affine_invariance(self):
        rng = np.random.default_rng(5)

        def gentle(x):
            d = np.hypot(x[:, 0], x[:, 1])
            return d * d * np.where(RULE.contains(x), 1.0, 0.0)

        sample = square_sample(rng, n=2000, mean_fn=gentle, noise=0.5)
        H = candidate_bandwidths(sample, (0.0, 0.0), RULE, num=8)
        h1 = mse_pilot_bandwidth(sample, (0.0, 0.0), RULE, "triangular", 1,
                                 candidates=H)
        scaled = Sample(3.5 * sample.y - 2.0, sample.x, sample.treated)
        h2 = mse_pilot_bandwidth(scaled, (0.0, 0.0), RULE, "triangular", 1,
                                 candidates=H)
        assert h1 == h2

    def test_all_candidates_failing(self):
        rng = np.random.default_rng(6)
        sample = square_sample(rng, n=50)
        with pytest.raises(BandwidthSelectionError):
            mse_pilot_bandwidth(sample, (0.0, 0.0), RULE, "uniform", 1,
                                candidates=np.full(6, 1e-9))

    def test_candidate_grid_shape(self):
        rng = np.random.default_rng(7)
        sample = square_sample(rng, n=500)
        H = candidate_bandwidths(sample, (0.0, 0.0), RULE, num=15)
        assert len(H) == 15
        assert np.all(np.diff(np.log(H)) > 0)
        assert_allclose(H[-1], 0.5 * data_diameter(sample.x))


class TestResolve:
    PL = BoundaryPolyline.from_vertices([(0.0, 1.0), (0.0, 0.0), (1.0, 0.0)])

    def test_fixed_and_rot(self):
        rng = np.random.default_rng(8)
        sample = square_sample(rng, n=600)
        grid = make_grid(self.PL, 3)
        hs = resolve_bandwidths(Fixed(0.5), sample, self.PL, RULE, grid,
                                "uniform", 1)
        assert_allclose(hs, 0.5)
        hs = resolve_bandwidths(RuleOfThumb(c0=2.0), sample, self.PL, RULE,
                                grid, "uniform", 1)
        assert np.unique(hs).size == 1

    def test_fixed_above_diameter_rejected(self):
        rng = np.random.default_rng(9)
        sample = square_sample(rng, n=100)
        grid = make_grid(self.PL, 2)
        from bddist.errors import InvalidBandwidthError

        with pytest.raises(InvalidBandwidthError):
            resolve_bandwidths(Fixed(50.0), sample, self.PL, RULE, grid,
                               "uniform", 1)

    def test_kink_adaptive_capped_by_pilot(self):
        rng = np.random.default_rng(10)
        sample = square_sample(rng, n=1500)
        grid = make_grid(self.PL, 5)
        hs_mse = resolve_bandwidths(MsePilot(num_candidates=6), sample, self.PL,
                                    RULE, grid, "uniform", 1)
        hs_kink = resolve_bandwidths(KinkAdaptive(num_candidates=6), sample,
                                     self.PL, RULE, grid, "uniform", 1)
        assert np.all(hs_kink <= hs_mse + 1e-12)


class TestDataDiameter:
    def test_square(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]])
        assert_allclose(data_diameter(pts), np.sqrt(2.0))

    def test_collinear(self):
        pts = np.column_stack([np.linspace(0, 3, 7), np.zeros(7)])
        assert_allclose(data_diameter(pts), 3.0)
