import math

import numpy as np
import pytest

from qslstm.datasets import (
    Dataset,
    SignalConfig,
    build_benchmark_datasets,
    gen_damped_oscillator,
    gen_sawtooth,
    gen_sine,
    gen_summed_waves,
    make_windows,
    oscillator_constants,
    scale_minmax,
    split_chronological,
    summed_waves_value,
    write_series_csv,
)


class TestSine:
    def test_starts_at_zero(self):
        assert gen_sine(100, periods=4)[0] == 0.0

    def test_quarter_period(self):
        # periods=1, k=(n-1)/4 lands exactly on the peak
        s = gen_sine(101, periods=1)
        assert s[25] == pytest.approx(1.0, abs=1e-12)

    def test_range(self):
        s = gen_sine(300, periods=4)
        assert s.max() == pytest.approx(1.0, abs=1e-3)
        assert s.min() == pytest.approx(-1.0, abs=1e-3)


class TestSawtooth:
    def test_starts_at_minus_one(self):
        assert gen_sawtooth(100, periods=4)[0] == -1.0

    def test_mid_period_zero(self):
        # periods=2 over 101 points: phase 0.5 at k=25
        s = gen_sawtooth(101, periods=2)
        assert s[25] == pytest.approx(0.0, abs=1e-12)

    def test_discontinuity_at_boundary(self):
        # periods=4 over 401 points: boundary every 100 samples
        s = gen_sawtooth(401, periods=4)
        assert s[99] == pytest.approx(1.0, abs=0.03)
        assert s[100] == pytest.approx(-1.0, abs=1e-12)


class TestSummedWaves:
    def test_x_zero_is_two(self):
        s = gen_summed_waves(n_points=50, x_max=99.0)
        assert s[0] == pytest.approx(2.0, abs=1e-15)

    def test_zero_at_24_75(self):
        # 2π·24.75/9 = 5.5π and 2π·24.75/11 = 4.5π: both cosines vanish
        assert abs(summed_waves_value(24.75)) <= 1e-9
        # grid with x step 0.25 hits 24.75 exactly at k=99
        s = gen_summed_waves(n_points=397, x_max=99.0)
        assert abs(s[99]) <= 1e-9

    def test_amplitude_bound(self):
        s = gen_summed_waves(n_points=500, x_max=99.0)
        assert np.all(np.abs(s) <= 2.0 + 1e-12)


class TestDampedOscillator:
    def test_constants_from_default_parameters(self):
        omega0, chi = oscillator_constants(mass=0.75, spring_k=4.0, friction_c=0.1)
        assert omega0 == pytest.approx(2.309401, abs=1e-6)
        assert chi == pytest.approx(0.0288675, abs=1e-7)

    def test_initial_condition(self):
        s = gen_damped_oscillator(n_points=10, t_max=20.0, x0=1.0)
        assert s[0] == 1.0

    def test_residual_of_equation_of_motion(self):
        # second-order central differences on a dense grid: the closed form
        # must satisfy x'' + 2·chi·omega0·x' + omega0^2·x = 0
        n, t_max = 80001, 20.0
        s = gen_damped_oscillator(n_points=n, t_max=t_max)
        dt = t_max / (n - 1)
        x = s[1:-1]
        xp = (s[2:] - s[:-2]) / (2 * dt)
        xpp = (s[2:] - 2 * s[1:-1] + s[:-2]) / dt**2
        omega0, chi = oscillator_constants(mass=0.75, spring_k=4.0, friction_c=0.1)
        residual = xpp + 2 * chi * omega0 * xp + omega0**2 * x
        assert np.max(np.abs(residual)) <= 1e-6

    def test_overdamped_rejected(self):
        with pytest.raises(ValueError):
            gen_damped_oscillator(n_points=10, t_max=20.0, friction_c=10.0)


class TestScaleMinmax:
    def test_simple(self):
        scaled, scaler = scale_minmax(np.array([0.0, 5.0, 10.0]))
        assert np.allclose(scaled, [-1.0, 0.0, 1.0], atol=1e-15)
        assert scaler == (0.0, 10.0)

    def test_already_unit_range_unchanged(self):
        s = np.array([-1.0, -0.25, 0.5, 1.0])
        scaled, _ = scale_minmax(s)
        assert np.allclose(scaled, s, atol=1e-12)

    def test_round_trip(self):
        prng = np.random.default_rng(2)
        s = prng.normal(size=40) * 3 + 1
        scaled, (lo, hi) = scale_minmax(s)
        recovered = (scaled + 1) / 2 * (hi - lo) + lo
        assert np.allclose(recovered, s, atol=1e-12)

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            scale_minmax(np.full(5, 3.3))


class TestMakeWindows:
    def test_basic_pairs(self):
        ds = make_windows(np.array([1.0, 2, 3, 4, 5]), 3)
        assert len(ds) == 2
        assert np.array_equal(ds.windows[0].ravel(), [1, 2, 3])
        assert ds.targets[0][0] == 4
        assert np.array_equal(ds.windows[1].ravel(), [2, 3, 4])
        assert ds.targets[1][0] == 5

    def test_single_pair(self):
        ds = make_windows(np.arange(6.0), 5)
        assert len(ds) == 1

    def test_pair_count(self):
        ds = make_windows(np.arange(50.0), 4)
        assert len(ds) == 46

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            make_windows(np.arange(4.0), 4)

    def test_alignment_invariant(self):
        series = np.sin(np.arange(30.0))
        ds = make_windows(series, 7)
        for k in range(len(ds)):
            assert ds.targets[k][0] == series[k + 7]


class TestSplit:
    def test_three_pairs(self):
        ds = make_windows(np.arange(6.0), 3)
        train, val = split_chronological(ds, 0.67)
        assert len(train) == 2 and len(val) == 1

    def test_half_of_ten(self):
        ds = make_windows(np.arange(13.0), 3)
        assert len(ds) == 10
        train, val = split_chronological(ds, 0.5)
        assert len(train) == 5 and len(val) == 5

    def test_partition_order_preserved(self):
        ds = make_windows(np.arange(20.0), 4)
        train, val = split_chronological(ds, 0.7)
        merged = np.concatenate([train.targets, val.targets])
        assert np.array_equal(merged, ds.targets)

    def test_degenerate_split_rejected(self):
        ds = make_windows(np.arange(5.0), 3)  # 2 pairs
        with pytest.raises(ValueError):
            split_chronological(ds, 0.05)  # 0 train pairs


class TestBenchmarkAssembly:
    @pytest.mark.parametrize("kind", ["sine", "sawtooth", "summed_waves", "damped_oscillator"])
    def test_scaled_range_and_shapes(self, kind):
        train, val, raw = build_benchmark_datasets(SignalConfig(kind=kind))
        for ds in (train, val):
            assert ds.windows.ndim == 3 and ds.windows.shape[1:] == (4, 1)
            assert np.all(ds.windows >= -1.0) and np.all(ds.windows <= 1.0)
            assert np.all(np.abs(ds.targets) <= 1.0)
        assert len(raw) == 300

    def test_default_sine_split_sizes(self):
        train, val, _ = build_benchmark_datasets(SignalConfig(kind="sine"))
        assert len(train) == 198 and len(val) == 98

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            SignalConfig(kind="square")


def test_write_series_csv(tmp_path):
    path = tmp_path / "series.csv"
    write_series_csv(path, np.array([0.5, -0.25]))
    assert path.read_text() == "index,value\n0,0.5\n1,-0.25\n"
