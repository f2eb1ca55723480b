import numpy as np
import pytest

from cachecast.channel import (
    RngStream,
    SystemConfig,
    batch_counts,
    draw_channel,
    draw_channel_batch,
    exact_min_mean,
    min_norm_statistic,
    per_user_snr,
    scalars_per_draw,
    squared_row_norms,
)


def test_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(num_users=0, num_tx_antennas=1, total_power=1.0)
    with pytest.raises(ValueError):
        SystemConfig(num_users=1, num_tx_antennas=1, total_power=-1.0)
    with pytest.raises(ValueError):
        SystemConfig(num_users=1, num_tx_antennas=1, total_power=1.0, normalized_cache=1.5)
    with pytest.raises(ValueError):
        SystemConfig(num_users=1, num_tx_antennas=1, total_power=1.0, csit_error_var=2.0)
    with pytest.raises(ValueError):
        SystemConfig(num_users=1, num_tx_antennas=1, total_power=1.0, placement="exotic")


def test_split_holds_bit_exactly():
    cfg = SystemConfig(num_users=3, num_tx_antennas=4, total_power=5.0, csit_error_var=0.3)
    draw = draw_channel(cfg, RngStream(1))
    np.testing.assert_array_equal(draw.true_h, draw.est_h + draw.err_h)


def test_degenerate_error_variances():
    perfect = SystemConfig(num_users=2, num_tx_antennas=2, total_power=1.0, csit_error_var=0.0)
    d = draw_channel(perfect, RngStream(2))
    np.testing.assert_array_equal(d.est_h, d.true_h)
    assert np.all(d.err_h == 0)
    blind = SystemConfig(num_users=2, num_tx_antennas=2, total_power=1.0, csit_error_var=1.0)
    d = draw_channel(blind, RngStream(2))
    np.testing.assert_array_equal(d.err_h, d.true_h)
    assert np.all(d.est_h == 0)


def test_entry_variances():
    cfg = SystemConfig(num_users=40, num_tx_antennas=25, total_power=1.0, csit_error_var=0.25)
    true, est, err = draw_channel_batch(cfg, RngStream(3).generator(), 200)
    assert np.mean(np.abs(est) ** 2) == pytest.approx(0.75, rel=0.02)
    assert np.mean(np.abs(err) ** 2) == pytest.approx(0.25, rel=0.02)
    assert np.mean(np.abs(true) ** 2) == pytest.approx(1.0, rel=0.02)


def test_stream_reproducibility_and_independence():
    cfg = SystemConfig(num_users=2, num_tx_antennas=2, total_power=1.0)
    a = draw_channel(cfg, RngStream(7, 1)).true_h
    b = draw_channel(cfg, RngStream(7, 1)).true_h
    c = draw_channel(cfg, RngStream(7, 2)).true_h
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_derive_is_deterministic_and_distinct():
    root = RngStream(11)
    assert root.derive(3) == root.derive(3)
    assert root.derive(3) != root.derive(4)
    assert root.derive(0) != root


def test_per_user_snr_shape_and_bounds():
    cfg = SystemConfig(num_users=5, num_tx_antennas=3, total_power=9.0, num_subchannels=2)
    draw = draw_channel(cfg, RngStream(5))
    snr = per_user_snr(cfg, draw, l=2)
    assert snr.shape == (5,)
    assert np.all(snr >= 0)
    with pytest.raises(IndexError):
        per_user_snr(cfg, draw, l=3)
    with pytest.raises(IndexError):
        per_user_snr(cfg, draw, l=0)


def test_squared_row_norms():
    h = np.array([[1.0 + 1.0j, 2.0]])
    assert squared_row_norms(h)[0] == pytest.approx(6.0)


def test_scalars_per_draw_counts_error_draws():
    base = dict(num_users=3, num_tx_antennas=2, total_power=1.0, num_subchannels=2)
    assert scalars_per_draw(SystemConfig(**base)) == 24
    assert scalars_per_draw(SystemConfig(**base, csit_error_var=1.0)) == 24
    assert scalars_per_draw(SystemConfig(**base, csit_error_var=0.5)) == 48


def test_batch_counts_partition():
    counts = list(batch_counts(10_000, 1_000))
    assert sum(counts) == 10_000
    assert max(counts) == 4_000
    with pytest.raises(ValueError):
        list(batch_counts(0, 10))


def test_exact_min_mean_known_values():
    # closed-form / quadrature-checked references
    assert exact_min_mean(1, 7) == pytest.approx(1.0 / 7.0, abs=1e-15)
    assert exact_min_mean(2, 2) == pytest.approx(0.625, abs=1e-15)
    assert exact_min_mean(2, 5) == pytest.approx(0.35104, abs=1e-12)
    assert exact_min_mean(3, 4) == pytest.approx(0.488677978515625, abs=1e-12)


def test_exact_min_mean_guard():
    with pytest.raises(ValueError):
        exact_min_mean(5, 100)


def test_min_norm_statistic_matches_exact_mean():
    est = min_norm_statistic(2, 5, RngStream(13), 200_000)
    assert abs(est.mean - 0.35104) < 4 * est.std_err
    assert est.std_err > 0
    again = min_norm_statistic(2, 5, RngStream(13), 200_000)
    assert est.mean == again.mean


def test_min_norm_statistic_float32_agrees():
    a = min_norm_statistic(2, 10, RngStream(17), 50_000)
    b = min_norm_statistic(2, 10, RngStream(18), 50_000, dtype=np.float32)
    assert b.mean == pytest.approx(a.mean, rel=0.05)
