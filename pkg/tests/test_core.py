import numpy as np
import pytest

from conftest import SEEDS, random_density
from graddens.core import (
    DensityEstimate,
    GridSpec,
    IntervalQuery,
    ScalarField,
    analysis_grid,
    interval_mass,
    l1_distance,
    l1_mass_distance,
    make_grid,
    read_density_csv,
    rebin_density,
    resample_density,
)
from graddens.errors import (
    ArtifactIOError,
    GridMismatchError,
    InvalidDomainError,
    NormalizationError,
    OutOfRangeError,
)


class TestGridSpec:
    def test_midpoints(self):
        grid = make_grid(-1.0, 1.0, 4)
        assert grid.dx == 0.5
        assert grid.length == 2.0
        np.testing.assert_allclose(grid.points(), [-0.75, -0.25, 0.25, 0.75])

    @pytest.mark.parametrize('b1,b2,n', [(0.5, 0.5, 8), (1.0, 0.0, 8), (0.0, 1.0, 1), (0.0, np.inf, 8)])
    def test_rejects_bad_domains(self, b1, b2, n):
        with pytest.raises(InvalidDomainError):
            GridSpec(b1, b2, n)

    def test_message_names_bounds(self):
        with pytest.raises(InvalidDomainError, match="b1=0.5, b2=0.5"):
            GridSpec(0.5, 0.5, 16)

    def test_field_length_must_match(self):
        with pytest.raises(InvalidDomainError):
            ScalarField(make_grid(0, 1, 8), np.zeros(7))

    def test_field_is_read_only(self):
        field = ScalarField(make_grid(0, 1, 8), np.zeros(8))
        with pytest.raises(ValueError):
            field.values[0] = 1.0


class TestDensityEstimate:
    def test_valid_estimate(self):
        d = DensityEstimate([0.0, 1.0, 2.0], [0.25, 0.5, 0.25], 1.0)
        assert d.mass() == pytest.approx(1.0)
        assert d.mean() == pytest.approx(1.0)
        np.testing.assert_allclose(d.edges, [-0.5, 0.5, 1.5, 2.5])
        np.testing.assert_allclose(d.cdf(), [0.25, 0.75, 1.0])

    def test_rejects_wrong_mass(self):
        with pytest.raises(NormalizationError):
            DensityEstimate([0.0, 1.0], [0.5, 0.6], 1.0)

    def test_rejects_negative_values(self):
        with pytest.raises(InvalidDomainError):
            DensityEstimate([0.0, 1.0, 2.0], [1.2, -0.2, 0.0], 1.0)

    def test_rejects_non_uniform_centers(self):
        with pytest.raises(InvalidDomainError):
            DensityEstimate([0.0, 1.0, 2.5], [0.5, 0.25, 0.25], 1.0)

    def test_value_at(self):
        d = DensityEstimate([0.0, 1.0], [0.25, 0.75], 1.0)
        np.testing.assert_allclose(d.value_at([-0.4, 0.9, 1.4, 1.6, -0.6]), [0.25, 0.75, 0.75, 0.0, 0.0])

    def test_csv_round_trip(self, tmp_path):
        d = random_density(np.random.default_rng(7))
        path = tmp_path / 'd.csv'
        d.to_csv(path)
        back = read_density_csv(path)
        np.testing.assert_array_equal(back.p, d.p)
        np.testing.assert_array_equal(back.u, d.u)

    def test_unwritable_path_names_the_path(self, tmp_path):
        d = DensityEstimate([0.0], [1.0], 1.0)
        target = tmp_path / 'missing' / 'd.csv'
        with pytest.raises(ArtifactIOError, match='missing'):
            d.to_csv(target)


class TestL1Distance:
    @pytest.mark.parametrize('seed', SEEDS)
    def test_metric_axioms(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(8, 64))
        a, b, c = (random_density(rng, m=m, start=0.0, du=0.1) for _ in range(3))
        assert l1_distance(a, a) == 0.0
        assert l1_distance(a, b) == pytest.approx(l1_distance(b, a), rel=1e-15)
        assert l1_distance(a, b) >= 0.0
        assert l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12
        assert 0.0 <= l1_mass_distance(a, b) <= 2.0 + 1e-12

    def test_raw_sum_not_scaled_by_du(self):
        a = DensityEstimate([0.0, 0.5], [2.0, 0.0], 0.5)
        b = DensityEstimate([0.0, 0.5], [0.0, 2.0], 0.5)
        assert l1_distance(a, b) == pytest.approx(4.0)
        assert l1_mass_distance(a, b) == pytest.approx(2.0)

    def test_mismatched_grids_without_resampling(self):
        rng = np.random.default_rng(0)
        a = random_density(rng, m=16, start=0.0, du=0.1)
        b = random_density(rng, m=17, start=0.0, du=0.1)
        with pytest.raises(GridMismatchError):
            l1_distance(a, b, resample=False)

    def test_mismatched_grids_are_resampled(self):
        a = DensityEstimate.normalized(np.arange(20) * 0.1, np.ones(20), 0.1)
        b = DensityEstimate.normalized(np.arange(39) * 0.05, np.ones(39), 0.05)
        assert l1_distance(a, b) == pytest.approx(0.0, abs=1e-9)


class TestIntervalMass:
    @pytest.mark.parametrize('seed', SEEDS)
    def test_additivity(self, seed):
        rng = np.random.default_rng(seed)
        d = random_density(rng)
        lo, hi = d.edges[0], d.edges[-1]
        cuts = np.sort(rng.uniform(lo, hi, 3))
        left = interval_mass(d, IntervalQuery(cuts[0], cuts[1] - cuts[0]))
        right = interval_mass(d, IntervalQuery(cuts[1], cuts[2] - cuts[1]))
        whole = interval_mass(d, IntervalQuery(cuts[0], cuts[2] - cuts[0]))
        assert left + right == pytest.approx(whole, abs=1e-12)

    def test_whole_range_is_unit_mass(self):
        d = random_density(np.random.default_rng(3))
        q = IntervalQuery(d.edges[0], d.edges[-1] - d.edges[0])
        assert interval_mass(d, q) == pytest.approx(1.0, abs=1e-12)

    def test_fractional_edge_bins(self):
        d = DensityEstimate([0.0, 1.0], [0.25, 0.75], 1.0)
        assert interval_mass(d, IntervalQuery(0.0, 1.0)) == pytest.approx(0.5 * 0.25 + 0.5 * 0.75)

    def test_outside_range(self):
        d = DensityEstimate([0.0, 1.0], [0.5, 0.5], 1.0)
        with pytest.raises(OutOfRangeError):
            interval_mass(d, IntervalQuery(1.0, 1.0))

    def test_alpha_must_be_positive(self):
        with pytest.raises(InvalidDomainError):
            IntervalQuery(0.0, 0.0)


class TestResampleAndRebin:
    def test_resample_onto_same_grid_is_identity(self):
        d = random_density(np.random.default_rng(11))
        np.testing.assert_allclose(resample_density(d, d.u).p, d.p, rtol=1e-12)

    def test_resample_beyond_one_bin(self):
        d = DensityEstimate.normalized(np.arange(10) * 0.1, np.ones(10), 0.1)
        with pytest.raises(OutOfRangeError):
            resample_density(d, np.linspace(0.0, 2.0, 21))
        padded = resample_density(d, np.linspace(0.0, 2.0, 21), pad_zeros=True)
        assert padded.mass() == pytest.approx(1.0)
        assert np.all(padded.p[padded.u > 1.0] == 0.0)

    def test_rebin_onto_same_grid_is_identity(self):
        d = random_density(np.random.default_rng(5))
        np.testing.assert_allclose(rebin_density(d, d.u).p, d.p, rtol=1e-9)

    def test_rebin_merges_pairs(self):
        d = random_density(np.random.default_rng(9), m=32, start=0.0, du=0.1)
        coarse = 0.5 * (d.u[0::2] + d.u[1::2])
        merged = rebin_density(d, coarse)
        np.testing.assert_allclose(merged.p, 0.5 * (d.p[0::2] + d.p[1::2]), rtol=1e-9)

    def test_rebin_conserves_mass_of_point_mass(self):
        d = DensityEstimate([1.0], [10.0], 0.1)
        rebinned = rebin_density(d, analysis_grid(1.0, 1.0, 64))
        assert rebinned.mass() == pytest.approx(1.0)
        assert rebinned.mean() == pytest.approx(1.0, abs=1e-9)
        assert np.all(rebinned.p[np.abs(rebinned.u - 1.0) > 0.05 + rebinned.du] == 0.0)

    def test_triangle_survives_half_resolution_round_trip(self):
        u = np.linspace(-1.0, 1.0, 201)
        d = DensityEstimate.normalized(u, 1.0 - np.abs(u), u[1] - u[0])
        coarse = resample_density(d, d.u[::2])
        back = resample_density(coarse, d.u, pad_zeros=True)
        assert back.same_grid(d)
        assert l1_distance(d, back) < 10 * d.du


class TestAnalysisGrid:
    def test_padding(self):
        centers = analysis_grid(-1.0, 1.0, 256)
        du = centers[1] - centers[0]
        assert centers.size == 256
        assert centers[0] - 0.5 * du == pytest.approx(-1.5)
        assert centers[-1] + 0.5 * du == pytest.approx(1.5)

    def test_zero_width_support(self):
        centers = analysis_grid(1.0, 1.0, 64)
        du = centers[1] - centers[0]
        assert centers[0] - 0.5 * du == pytest.approx(0.75)
        assert centers[-1] + 0.5 * du == pytest.approx(1.25)
