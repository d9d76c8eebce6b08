import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from tsdistill import dataio
from tsdistill.dataio import DataError
from tsdistill.spectral import dft_amplitude

from oracles import naive_amplitude


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_csv_drops_date_column(tmp_path):
    rows = "\n".join(f"2020-01-0{i + 1},{i},{2 * i}" for i in range(5))
    ds = dataio.load_csv(write(tmp_path, "date,a,b\n" + rows + "\n"))
    assert ds.length == 5 and ds.n_channels == 2
    assert ds.channel_names == ("a", "b")
    np.testing.assert_array_equal(ds.values[:, 1], 2 * np.arange(5))


def test_csv_without_date_column(tmp_path):
    rows = "\n".join(f"{i},{i + 1},{i + 2}" for i in range(10))
    ds = dataio.load_csv(write(tmp_path, "a,b,c\n" + rows))
    assert ds.n_channels == 3 and ds.length == 10


def test_csv_nan_cell_names_row_and_column(tmp_path):
    p = write(tmp_path, "a,b\n1,2\n3,NaN\n5,6\n")
    with pytest.raises(DataError, match=r"row 3, column 'b'"):
        dataio.load_csv(p)


def test_csv_rejects_unparseable_and_short(tmp_path):
    with pytest.raises(DataError, match="row 2"):
        dataio.load_csv(write(tmp_path, "a\nfoo\n1\n"))
    with pytest.raises(DataError, match="at least 2"):
        dataio.load_csv(write(tmp_path, "a\n1\n", "short.csv"))
    with pytest.raises(DataError):
        dataio.load_csv(tmp_path / "missing.csv")


def _ds(L, C=1, seed=0):
    rng = np.random.default_rng(seed)
    return dataio.SeriesDataset(rng.standard_normal((L, C)), tuple(f"c{i}" for i in range(C)))


def test_split_standard_boundaries():
    ds = dataio.split_standard(_ds(100))
    assert (ds.train_end, ds.val_end) == (70, 80)


def test_split_rejects_zero_fraction_and_bad_sum():
    with pytest.raises(DataError):
        dataio.split_standard(_ds(100), (0.5, 0.5, 0.0))
    with pytest.raises(DataError):
        dataio.split_standard(_ds(100), (0.7, 0.2, 0.2))


def test_split_stats_fit_on_train_rows_only():
    values = np.concatenate([np.full((70, 1), 1.0), np.full((30, 1), 100.0)])
    values[::2] = 3.0
    ds = dataio.split_standard(dataio.SeriesDataset(values, ("x",)))
    assert ds.train_mean[0] == pytest.approx(2.0)
    assert ds.train_std[0] == pytest.approx(1.0)


def test_ett_convention_and_reference_counts():
    # ETTh1 has 17420 hourly rows; 12/4/4 months of 30 days
    ds = dataio.split_ett(_ds(17420), steps_per_hour=1)
    assert (ds.train_end, ds.val_end) == (8640, 11520)
    # reference accounting: val/test segments start one lookback early and
    # N = L_seg - lookback + 1, which gives the published (8545, 2881, 2881)
    lookback = 96
    segs = [ds.train_end, ds.val_end - ds.train_end + lookback, 14400 - ds.val_end + lookback]
    assert [s - lookback + 1 for s in segs] == [8545, 2881, 2881]
    with pytest.raises(DataError):
        dataio.split_ett(_ds(1000))


def test_standardize_constant_channel_is_zero():
    values = np.full((20, 1), 5.0)
    ds = dataio.standardize(dataio.split_standard(dataio.SeriesDataset(values, ("c",))))
    np.testing.assert_array_equal(ds.values, 0.0)


def test_standardize_hand_example():
    values = np.array([[1.0], [3.0], [3.0], [3.0], [3.0], [3.0], [3.0], [3.0], [3.0], [3.0]])
    ds = dataio.split_at(dataio.SeriesDataset(values, ("c",)), 2, 5)
    assert ds.train_mean[0] == 2.0 and ds.train_std[0] == 1.0
    z = dataio.standardize(ds)
    assert z.values[1, 0] == pytest.approx(1.0, abs=1e-7)


def test_standardize_is_flag_guarded_and_invertible():
    raw = dataio.split_standard(_ds(200, 3))
    z = dataio.standardize(raw)
    with pytest.raises(DataError):
        dataio.standardize(z)
    np.testing.assert_allclose(dataio.destandardize(z.values, z), raw.values, atol=1e-10)


def test_window_count_and_contiguity():
    ds = dataio.split_at(_ds(30), 10, 20)
    w = dataio.SplitWindows(ds, "train", 4, 2)
    assert len(w) == 5
    b = w.all()
    seg = ds.segment("train")
    for i, s in enumerate(b.window_starts):
        np.testing.assert_array_equal(b.X[i], seg[s : s + 4])
        np.testing.assert_array_equal(b.Y[i], seg[s + 4 : s + 6])
    assert list(b.window_starts) == sorted(b.window_starts)


def test_window_boundaries():
    ds = dataio.split_at(_ds(30), 10, 20)
    assert len(dataio.SplitWindows(ds, "val", 6, 4)) == 1
    with pytest.raises(DataError):
        dataio.SplitWindows(ds, "val", 6, 5)


def test_windows_stay_inside_split():
    ds = dataio.split_at(_ds(60, 2), 30, 45)
    for split in dataio.SPLITS:
        seg = ds.segment(split)
        b = dataio.SplitWindows(ds, split, 5, 3).all()
        # every window's rows appear in its own segment at the stated offset
        assert b.window_starts.max() + 8 <= seg.shape[0]


def test_make_windows_batches_preserve_order():
    ds = dataio.split_at(_ds(100), 60, 80)
    batches = dataio.make_windows(ds, "train", 8, 4, batch_size=7)
    starts = np.concatenate([b.window_starts for b in batches])
    np.testing.assert_array_equal(starts, np.arange(60 - 12 + 1))
    assert all(len(b.window_starts) <= 7 for b in batches)


def test_window_coverage_reconstructs_segment():
    ds = dataio.split_at(_ds(50, 2), 30, 40)
    T, S = 5, 3
    b = dataio.SplitWindows(ds, "train", T, S).all()
    seg = ds.segment("train")
    rebuilt = np.concatenate([b.Y[:, 0, :], b.Y[-1, 1:, :]])
    np.testing.assert_array_equal(rebuilt, seg[T:])


def test_synthetic_exact_periodicity():
    ds = dataio.synth_multiperiod(480, 2, [24], 0.0, 0.0, seed=3)
    for c in range(2):
        x = ds.values[:, c]
        r = np.corrcoef(x[:-24], x[24:])[0, 1]
        assert abs(r - 1.0) < 1e-9


def test_synthetic_determinism():
    a = dataio.synth_multiperiod(500, 3, [24, 96], 0.01, 0.3, seed=9)
    b = dataio.synth_multiperiod(500, 3, [24, 96], 0.01, 0.3, seed=9)
    assert a.values.tobytes() == b.values.tobytes()


def test_synthetic_spectrum_peaks():
    # 960 = 40 periods of 24 and 10 periods of 96
    ds = dataio.synth_multiperiod(960, 1, [24, 96], 0.0, 0.0, seed=0)
    ref = naive_amplitude(ds.values)[:, 0]
    top2 = sorted(int(k) + 1 for k in np.argsort(ref)[-2:])
    assert top2 == [10, 40]
    np.testing.assert_allclose(dft_amplitude(ds.values).amp[:, 0], ref, rtol=0, atol=1e-9 * ref.max())


def test_synthetic_rejects_short_series():
    with pytest.raises(DataError):
        dataio.synth_multiperiod(300, 1, [96])


@settings(max_examples=40, deadline=None)
@given(hs.integers(min_value=20, max_value=200), hs.integers(min_value=1, max_value=4), hs.integers(0, 10**6))
def test_standardize_roundtrip_property(L, C, seed):
    raw = dataio.split_standard(_ds(L, C, seed))
    z = dataio.standardize(raw)
    np.testing.assert_allclose(dataio.destandardize(z.values, z), raw.values, atol=1e-10)


def test_datasets_are_immutable():
    ds = dataio.split_standard(_ds(50))
    with pytest.raises(ValueError):
        ds.values[0, 0] = 1.0
