import csv
import io
from datetime import date, timedelta

import numpy as np
import pytest

BTS_COLUMNS = {
    "flight_date": "FL_DATE",
    "year": "YEAR",
    "month": "MONTH",
    "day_of_week": "DAY_OF_WEEK",
    "marketing_carrier": "MKT_UNIQUE_CARRIER",
    "operating_carrier": "OP_UNIQUE_CARRIER",
    "origin_state": "ORIGIN_STATE_ABR",
    "dest_state": "DEST_STATE_ABR",
    "scheduled_dep_time": "CRS_DEP_TIME",
    "scheduled_arr_time": "CRS_ARR_TIME",
    "dep_delay_minutes": "DEP_DELAY",
    "arr_delay_minutes": "ARR_DELAY",
    "distance_miles": "DISTANCE",
    "cancelled": "CANCELLED",
    "diverted": "DIVERTED",
}

CARRIERS = ["AA", "DL", "UA", "WN", "B6"]
STATES = ["CA", "TX", "NY", "FL", "IL", "GA", "WA"]


def synthetic_bts_rows(n_rows, seed=0, start=date(2018, 1, 1), months=3):
    """Random but plausible BTS-style rows; delays correlate with dep hour."""
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_rows):
        month_offset = int(rng.integers(0, months))
        y, m = divmod(start.month - 1 + month_offset, 12)
        year, month = start.year + y, m + 1
        day = int(rng.integers(1, 28))
        d = date(year, month, day)
        dep_hhmm = int(rng.integers(0, 24)) * 100 + int(rng.integers(0, 60))
        arr_hhmm = int(rng.integers(0, 24)) * 100 + int(rng.integers(0, 60))
        # later departures run later more often
        base = (dep_hhmm // 100 - 8) * 1.5
        dep_delay = float(np.round(rng.normal(base, 20), 1))
        arr_delay = float(np.round(dep_delay + rng.normal(0, 10), 1))
        rows.append(
            {
                "FL_DATE": d.isoformat(),
                "YEAR": str(year),
                "MONTH": str(month),
                "DAY_OF_WEEK": str(d.isoweekday()),
                "MKT_UNIQUE_CARRIER": str(rng.choice(CARRIERS)),
                "OP_UNIQUE_CARRIER": str(rng.choice(CARRIERS)),
                "ORIGIN_STATE_ABR": str(rng.choice(STATES)),
                "DEST_STATE_ABR": str(rng.choice(STATES)),
                "CRS_DEP_TIME": str(dep_hhmm),
                "CRS_ARR_TIME": str(arr_hhmm),
                "DEP_DELAY": str(dep_delay),
                "ARR_DELAY": str(arr_delay),
                "DISTANCE": str(int(rng.integers(80, 2900))),
                "CANCELLED": "0.00",
                "DIVERTED": "0.00",
            }
        )
    return rows


def rows_to_csv_text(rows, fieldnames=None):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames or list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


@pytest.fixture
def bts_csv(tmp_path):
    """Small synthetic BTS CSV on disk plus its column map."""
    rows = synthetic_bts_rows(600, seed=7)
    path = tmp_path / "flights.csv"
    path.write_text(rows_to_csv_text(rows))
    return path, dict(BTS_COLUMNS)


def make_circles(n, seed, noise=0.12):
    """Two concentric rings with Gaussian noise; label 1 = outer ring."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    radius = np.where(y == 1, 1.0, 0.55)
    theta = rng.uniform(0, 2 * np.pi, size=n)
    x = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    x += rng.normal(0, noise, size=x.shape)
    return x, y.astype(np.int64)
