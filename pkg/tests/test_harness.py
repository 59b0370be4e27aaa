import numpy as np
import pytest

from graddens.catalog import sample
from graddens.charfunc import CALL_COUNTS, estimate_density_charfunc
from graddens.config import SWEEP_TAUS
from graddens.core import IntervalQuery, l1_mass_distance, make_grid
from graddens.errors import ArtifactIOError, IngestError, SpectralCoverageError, TauTooLargeError, UsageError
from graddens.harness import (
    SweepResult,
    TimingTable,
    benchmark_scaling,
    compare_fields,
    compare_methods,
    export_sweep,
    export_timing,
    interval_convergence,
    load_sweep,
    load_timing,
    scaling_slopes,
    tau_sweep,
)

DOMAIN = (-0.125, 0.125)
SMALL = make_grid(*DOMAIN, 2 ** 12)


class TestPreconditions:
    def test_taus_must_descend(self, sinusoid):
        with pytest.raises(UsageError, match='descending'):
            tau_sweep(sinusoid, SMALL, [1e-4, 1e-4])
        with pytest.raises(UsageError, match='descending'):
            tau_sweep(sinusoid, SMALL, [1e-4, 3e-4])

    def test_taus_must_be_positive(self, sinusoid):
        with pytest.raises(UsageError):
            tau_sweep(sinusoid, SMALL, [1e-4, -1e-5])

    def test_unknown_alignment(self, sinusoid):
        with pytest.raises(UsageError, match='alignment'):
            compare_methods(sinusoid, SMALL, 1e-4, alignment='nearest')

    def test_reps_lower_bound(self, quadratic):
        with pytest.raises(UsageError, match='reps'):
            benchmark_scaling(quadratic, [1024, 2048], 1e-4, reps=1)

    @pytest.mark.parametrize('ns', [[1000, 2048], [2048, 1024], [], [1024, 1024]])
    def test_sizes_must_be_ascending_powers_of_two(self, quadratic, ns):
        with pytest.raises(UsageError):
            benchmark_scaling(quadratic, ns, 1e-4, reps=3)

    def test_aliasing_guard(self, sinusoid):
        with pytest.raises(UsageError, match='coverage'):
            tau_sweep(sinusoid, SMALL, [1e-4, 1e-6])
        result = tau_sweep(sinusoid, SMALL, [1e-4, 1e-6], allow_aliasing=True)
        assert np.all(np.isfinite(result.errors))


class TestSweep:
    def test_empty_sweep(self, sinusoid, tmp_path):
        result = tau_sweep(sinusoid, SMALL, [])
        assert result.taus.size == 0
        path = tmp_path / 'sweep.csv'
        export_sweep(result, path)
        assert path.read_text().strip() == 'tau,l1_error'
        assert load_sweep(path).taus.size == 0

    def test_charfunc_runs_once(self, sinusoid):
        before = CALL_COUNTS['characteristic_function']
        tau_sweep(sinusoid, SMALL, [3e-4, 1e-4, 5e-5])
        assert CALL_COUNTS['characteristic_function'] == before + 1

    def test_failed_tau_is_recorded(self, sinusoid, caplog):
        result = tau_sweep(sinusoid, SMALL, [0.05, 1e-4])
        assert np.isnan(result.errors[0])
        assert np.isfinite(result.errors[1])
        assert 0.05 in result.failures
        assert 'tau=0.05' in caplog.text

    def test_deterministic(self, quadratic):
        first = tau_sweep(quadratic, SMALL, [3e-4, 1e-4])
        second = tau_sweep(quadratic, SMALL, [3e-4, 1e-4])
        np.testing.assert_array_equal(first.errors, second.errors)

    def test_result_validates_shapes(self):
        with pytest.raises(UsageError):
            SweepResult(np.array([1e-4, 1e-5]), np.array([0.1]), 'x', 16)

    @pytest.mark.slow
    @pytest.mark.parametrize('name', ['sinusoid', 'quadratic'])
    def test_error_falls_with_tau(self, catalog, name):
        result = tau_sweep(catalog[name], make_grid(*DOMAIN, 2 ** 15), SWEEP_TAUS)
        assert np.all(np.isfinite(result.errors))
        assert np.all(np.diff(result.errors) < 0)
        assert result.errors[-1] <= 0.5 * result.errors[0]


class TestCompare:
    def test_both_on_common_grid(self, sinusoid):
        result = compare_methods(sinusoid, SMALL, 1e-4)
        assert result.wave.same_grid(result.charfunc)
        assert result.wave.m == 256
        assert result.error >= 0

    def test_resample_alignment_uses_wave_grid(self, sinusoid):
        result = compare_methods(sinusoid, SMALL, 1e-4, alignment='resample')
        assert result.wave.m == SMALL.n
        assert result.charfunc.same_grid(result.wave)
        assert result.charfunc.mass() == pytest.approx(1.0)

    def test_degenerate_function_still_compares(self, linear_degenerate):
        result = compare_methods(linear_degenerate, SMALL, 1e-4)
        assert np.isfinite(result.error)
        assert abs(result.wave.mean() - 1.0) < 5 * result.wave.du
        near = np.abs(result.wave.u - 1.0) <= 2 * result.wave.du
        assert np.sum(result.wave.p[near]) * result.wave.du >= 0.95
        # measured 0.82 at this n
        assert np.sum(result.charfunc.p[near]) * result.charfunc.du >= 0.75

    def test_reuses_precomputed_charfunc(self, quadratic):
        S, s = sample(quadratic, SMALL)
        charfunc = estimate_density_charfunc(s)
        before = CALL_COUNTS['characteristic_function']
        reused = compare_fields(S, s, 1e-4, charfunc=charfunc)
        assert CALL_COUNTS['characteristic_function'] == before
        assert reused.error == pytest.approx(compare_fields(S, s, 1e-4).error)

    @pytest.mark.parametrize('tau,error', [(1e-5, SpectralCoverageError), (0.05, TauTooLargeError)])
    def test_invalid_tau_fails_before_charfunc(self, quadratic, tau, error):
        S, s = sample(quadratic, SMALL)
        before = CALL_COUNTS['characteristic_function']
        with pytest.raises(error):
            compare_fields(S, s, tau)
        assert CALL_COUNTS['characteristic_function'] == before

    @pytest.mark.slow
    @pytest.mark.parametrize('name,error_bound,mass_bound', [('sinusoid', 2.4, 0.028), ('quadratic', 0.9, 0.011)])
    def test_estimators_agree(self, catalog, name, error_bound, mass_bound):
        result = compare_methods(catalog[name], make_grid(*DOMAIN, 2 ** 14), 1e-5)
        assert result.error < error_bound
        assert l1_mass_distance(result.wave, result.charfunc, resample=False) < mass_bound


class TestTiming:
    def test_small_benchmark(self, quadratic):
        table = benchmark_scaling(quadratic, [1024, 2048], 1e-4, reps=3)
        assert list(table.ns) == [1024, 2048]
        assert table.repetitions == 3
        assert np.all(table.wave_seconds > 0) and np.all(table.charfunc_seconds > 0)

    def test_slopes_of_synthetic_table(self):
        ns = np.array([1024, 2048, 4096, 8192])
        table = TimingTable(ns, 1e-6 * ns, 1e-9 * ns.astype(float) ** 2, 5)
        wave, charfunc = scaling_slopes(table)
        assert wave == pytest.approx(1.0)
        assert charfunc == pytest.approx(2.0)

    def test_slopes_need_two_sizes(self):
        with pytest.raises(UsageError):
            scaling_slopes(TimingTable([1024], [0.1], [0.2], 3))

    def test_rejects_non_positive_times(self):
        with pytest.raises(UsageError):
            TimingTable([1024, 2048], [0.1, 0.0], [0.2, 0.3], 3)


class TestIntervalConvergence:
    def test_quadratic_average(self, quadratic):
        trace = interval_convergence(quadratic, SMALL, IntervalQuery(-0.5, 1.0), [3e-4, 1e-4])
        assert trace.analytic == pytest.approx(0.5)
        np.testing.assert_allclose(trace.averages, 0.5, atol=2e-2)

    def test_sinusoid_approaches_arcsine(self, sinusoid):
        grid = make_grid(*DOMAIN, 2 ** 14)
        trace = interval_convergence(sinusoid, grid, IntervalQuery(0.45, 0.1), [1e-4, 1e-5])
        assert abs(trace.averages[-1] - trace.analytic) < 5e-2


class TestArtifacts:
    def test_sweep_round_trip(self, tmp_path):
        result = SweepResult(np.array([3e-4, 1e-4, 1e-5]), np.array([0.3, np.nan, 1 / 3]), 'sinusoid', 4096)
        path = tmp_path / 'sweep.csv'
        export_sweep(result, path)
        back = load_sweep(path)
        np.testing.assert_array_equal(back.taus, result.taus)
        np.testing.assert_array_equal(back.errors, result.errors)

    def test_timing_round_trip(self, tmp_path):
        table = TimingTable([1024, 2048], [0.001, 0.002], [0.01, 0.04], 5)
        path = tmp_path / 'timing.csv'
        export_timing(table, path)
        assert path.read_text().splitlines()[0] == 'n,wave_seconds,charfunc_seconds'
        back = load_timing(path)
        np.testing.assert_array_equal(back.ns, table.ns)
        np.testing.assert_array_equal(back.charfunc_seconds, table.charfunc_seconds)

    def test_unwritable_path(self, tmp_path):
        result = SweepResult(np.array([1e-4]), np.array([0.1]), 'x', 16)
        with pytest.raises(ArtifactIOError, match='nowhere'):
            export_sweep(result, tmp_path / 'nowhere' / 'sweep.csv')

    def test_wrong_header(self, tmp_path):
        path = tmp_path / 'sweep.csv'
        path.write_text('n,seconds\n1,2\n')
        with pytest.raises(IngestError, match='header'):
            load_sweep(path)
