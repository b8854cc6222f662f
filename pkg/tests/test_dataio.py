import numpy as np
import pytest

from robustmoments.core import CostKind, EmpiricalSample, empirical_moments
from robustmoments.dataio import (PricePanel, load_price_panel_csv, load_series_csv,
                                  prices_to_portfolio_returns, result_to_json,
                                  save_series_csv)
from robustmoments.errors import DomainError


def test_load_iphone_series(data_dir):
    sample = load_series_csv(data_dir / "iphone_sales.csv")
    assert sample.n == 12
    assert empirical_moments(sample).mu == pytest.approx(122.345)


def test_load_missing_file(tmp_path):
    with pytest.raises(DomainError):
        load_series_csv(tmp_path / "nope.csv")


def test_header_only_is_empty(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("value\n")
    with pytest.raises(DomainError, match="no numeric values"):
        load_series_csv(p)


def test_parse_error_cites_row(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("value\n1.5\nabc\n2.5\n")
    with pytest.raises(DomainError, match="row 3"):
        load_series_csv(p)


def test_series_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    sample = EmpiricalSample(rng.normal(size=37) * 1e3)
    out = tmp_path / "rt.csv"
    save_series_csv(sample, out, header="v")
    again = load_series_csv(out)
    assert again.points == sample.points  # bit-exact


def test_panel_loader(data_dir):
    panel = load_price_panel_csv(data_dir / "basket_2020_prices.csv")
    assert panel.tickers == ("APA", "AXP", "CAT", "COF", "FCX", "IBM", "MMM")
    assert len(panel.dates) == 9
    assert panel.prices.shape == (7, 9)


def test_panel_rejects_nonpositive_price(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("date,AAA\n2020-01-31,10\n2020-02-28,-1\n")
    with pytest.raises(DomainError, match="AAA"):
        load_price_panel_csv(p)


def test_single_ticker_return():
    panel = PricePanel(("AAA",), ("d0", "d1"), np.array([[100.0, 110.0]]))
    sample = prices_to_portfolio_returns(panel)
    assert sample.points == (pytest.approx(10.0),)


def test_apa_single_ticker_contribution(data_dir):
    panel = load_price_panel_csv(data_dir / "basket_2020_prices.csv")
    i = panel.tickers.index("APA")
    solo = PricePanel(("APA",), panel.dates[:2], panel.prices[i:i + 1, :2])
    ret = prices_to_portfolio_returns(solo).points[0]
    assert ret == pytest.approx(100.0 * (24.80 / 27.10 - 1.0), abs=1e-9)
    assert ret == pytest.approx(-8.487, abs=1e-3)


def test_output_length_and_equivariance(data_dir):
    panel = load_price_panel_csv(data_dir / "basket_2020_prices.csv")
    rets = prices_to_portfolio_returns(panel)
    assert rets.n == len(panel.dates) - 1
    scaled = PricePanel(panel.tickers, panel.dates,
                        panel.prices * np.where(np.arange(7) == 2, 5.0, 1.0)[:, None])
    assert prices_to_portfolio_returns(scaled).points == pytest.approx(rets.points)


def test_buy_and_hold_convention():
    prices = np.array([[100.0, 50.0, 100.0], [100.0, 150.0, 100.0]])
    panel = PricePanel(("A", "B"), ("d0", "d1", "d2"), prices)
    rb = prices_to_portfolio_returns(panel, rebalance=True)
    bh = prices_to_portfolio_returns(panel, rebalance=False)
    # month 1 identical (equal weights at start); month 2 differs once weights drift
    assert rb.points != bh.points
    v1 = 0.5 * (50 / 100 + 150 / 100)
    v2 = 0.5 * (100 / 100 + 100 / 100)
    assert sorted(bh.points)[0] == pytest.approx(min(100 * (v1 - 1), 100 * (v2 / v1 - 1)))


def test_portfolio_fixture_statistics(portfolio_sample, portfolio_moments):
    assert portfolio_sample.n == 60
    assert portfolio_moments.mu == pytest.approx(1.11, abs=1e-9)
    assert portfolio_moments.sigma == pytest.approx(9.43, abs=1e-9)


def test_fixture_contains_2020_panel_returns(data_dir, portfolio_sample):
    panel = load_price_panel_csv(data_dir / "basket_2020_prices.csv")
    rets = prices_to_portfolio_returns(panel)
    for r in rets.points:
        assert any(abs(r - p) < 1e-12 for p in portfolio_sample.points)


def test_result_json_schema():
    text = result_to_json({"kind": "UZPM", "tau": 1.0, "mu": 0.0, "sigma": 1.0,
                           "n": 2, "data": "x.csv"},
                          0.5, 0.7, 0.8, "DD", 12.5)
    import json
    payload = json.loads(text)
    assert set(payload) == {"problem", "delta", "bound", "classical", "method",
                            "runtime_ms"}
    assert json.dumps(payload, sort_keys=True) == text
