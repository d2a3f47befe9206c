import numpy as np
import pytest

from privopt.errors import DimensionError, ParseError
from privopt.experiments.returns import ReturnsData, from_samples, load_returns_csv, synthesize_returns


def write(tmp_path, text, name="r.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_zero_returns(tmp_path):
    r = load_returns_csv(write(tmp_path, "AAA\n0.0\n0.0\n"))
    assert r.mean.tolist() == [0.0]
    assert r.covariance.tolist() == [[0.0]]
    assert r.n_weeks == 2 and r.tickers == ("AAA",)


def test_toy_csv_hand_computation(tmp_path):
    r = load_returns_csv(write(tmp_path, "X,Y\n0.01,0.02\n0.03,-0.01\n0.02,0.05\n"))
    np.testing.assert_allclose(r.mean, [0.02, 0.02])
    # deviations x: (-.01, .01, 0), y: (0, -.03, .03); divide by n - 1 = 2
    np.testing.assert_allclose(r.covariance, [[1e-4, -1.5e-4], [-1.5e-4, 9e-4]], atol=1e-15)


def test_text_cell_is_located(tmp_path):
    with pytest.raises(ParseError) as ei:
        load_returns_csv(write(tmp_path, "X,Y\n0.01,0.02\n0.03,abc\n"))
    assert (ei.value.row, ei.value.column) == (3, 2)
    assert "abc" in str(ei.value)


def test_ragged_rows_and_too_few_weeks(tmp_path):
    with pytest.raises(ParseError):
        load_returns_csv(write(tmp_path, "X,Y\n0.01\n"))
    with pytest.raises(DimensionError):
        load_returns_csv(write(tmp_path, "X\n0.01\n"))
    with pytest.raises(DimensionError):
        ReturnsData(np.zeros(2), np.eye(3), 5)


def test_synthetic_covariance_is_psd():
    r = synthesize_returns(28, 1363, seed=7)
    assert r.n_assets == 28 and r.n_weeks == 1363
    assert np.linalg.eigvalsh(r.covariance).min() >= -1e-10


def test_synthetic_is_deterministic():
    a, b = synthesize_returns(5, 50, seed=3), synthesize_returns(5, 50, seed=3)
    assert a.mean.tobytes() == b.mean.tobytes()
    assert a.covariance.tobytes() == b.covariance.tobytes()
    assert synthesize_returns(5, 50, seed=4).mean.tobytes() != a.mean.tobytes()


def test_zero_volatility_gives_zero_covariance():
    r = synthesize_returns(1, 10, seed=1, factor_vol=0.0, idio_vol=0.0)
    assert r.covariance[0, 0] == pytest.approx(0.0, abs=1e-30)
    with pytest.raises(ValueError):
        synthesize_returns(5, 5)


def test_from_samples_matches_numpy():
    R = np.random.default_rng(0).normal(size=(30, 4))
    r = from_samples(R)
    np.testing.assert_allclose(r.covariance, np.cov(R.T), rtol=1e-12)
