"""Shared fixtures: a deterministic census-like table builder."""

from __future__ import annotations

import numpy as np
import pytest

from driftgen.schema import extract_schema
from driftgen.tabular import Table

WORKCLASSES = ["Private", "Self-emp", "Local-gov", "State-gov", "Federal-gov", "Without-pay", "Never-worked"]
WORKCLASS_P = [0.70, 0.11, 0.07, 0.05, 0.04, 0.02, 0.01]
MARITAL = ["Married", "Never-married", "Divorced", "Separated", "Widowed"]
MARITAL_P = [0.46, 0.33, 0.14, 0.03, 0.04]
OCCUPATIONS = ["Craft-repair", "Exec-managerial", "Prof-specialty", "Sales", "Tech-support", "Farming", "Transport", "Other-service"]
OCCUPATION_P = [0.13, 0.13, 0.13, 0.12, 0.10, 0.10, 0.14, 0.15]
INCOME = ["<=50K", ">50K"]
INCOME_P = [0.76, 0.24]


def make_census(n: int, seed: int = 0) -> Table:
    """Synthetic census-shaped table: mixed numeric, categorical, datetime."""
    rng = np.random.default_rng(seed)
    age = np.clip(np.round(rng.normal(38, 13, n)), 18, 90).astype(int)
    education = rng.integers(1, 17, n)
    hours = np.clip(np.round(rng.normal(40, 12, n)), 1, 99).astype(int)
    gain = np.round(rng.exponential(1100, n), 2)
    fnlwgt = np.round(rng.lognormal(11.0, 0.6, n), 1)
    workclass = rng.choice(WORKCLASSES, n, p=WORKCLASS_P)
    marital = rng.choice(MARITAL, n, p=MARITAL_P)
    occupation = rng.choice(OCCUPATIONS, n, p=OCCUPATION_P).astype(object)
    income = rng.choice(INCOME, n, p=INCOME_P)
    # ~2% nulls on one column to exercise null handling
    null_at = rng.choice(n, size=max(n // 50, 1), replace=False)
    occupation[null_at] = None
    day = rng.integers(0, 2192, n)  # 2015-01-01 .. 2020-12-31
    dates = np.datetime64("2015-01-01") + day.astype("timedelta64[D]")

    return Table(
        "census",
        [
            ("age", [str(v) for v in age]),
            ("workclass", [str(v) for v in workclass]),
            ("education_num", [str(v) for v in education]),
            ("marital_status", [str(v) for v in marital]),
            ("occupation", [None if v is None else str(v) for v in occupation]),
            ("hours_per_week", [str(v) for v in hours]),
            ("capital_gain", [repr(float(v)) for v in gain]),
            ("fnlwgt", [repr(float(v)) for v in fnlwgt]),
            ("income", [str(v) for v in income]),
            ("signup_date", [str(v) for v in dates]),
        ],
    )


@pytest.fixture(scope="session")
def census_table():
    return make_census(4000, seed=11)


@pytest.fixture(scope="session")
def census_schema(census_table):
    return extract_schema(census_table)
