from pathlib import Path

import pytest

from robustmoments.core import EmpiricalSample, MomentSpec, empirical_moments
from robustmoments.dataio import load_series_csv

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def twopoint_sample() -> EmpiricalSample:
    return EmpiricalSample([10.0, 12.0])


@pytest.fixture(scope="session")
def twopoint_moments() -> MomentSpec:
    return MomentSpec(11.0, 1.0)


@pytest.fixture(scope="session")
def iphone_sample() -> EmpiricalSample:
    return load_series_csv(DATA_DIR / "iphone_sales.csv")


@pytest.fixture(scope="session")
def iphone_moments(iphone_sample) -> MomentSpec:
    return empirical_moments(iphone_sample)


@pytest.fixture(scope="session")
def portfolio_sample() -> EmpiricalSample:
    return load_series_csv(DATA_DIR / "portfolio_returns_60.csv")


@pytest.fixture(scope="session")
def portfolio_moments(portfolio_sample) -> MomentSpec:
    return empirical_moments(portfolio_sample)
