"""BTS on-time-performance ingestion: parsing, labels, sampling, encoding.

The raw CSV layout varies with the fields selected at export time, so the
caller supplies a column map from record fields to CSV header names.
Rows that are cancelled, diverted, or missing a delay value are dropped
and tallied in a skip report.
"""
import csv
import warnings
from dataclasses import dataclass, field
from datetime import date, datetime

import numpy as np

from .errors import DomainError, EmptyTableError, SchemaError

TASKS = ("departure", "arrival", "total")

HAUL_SHORT = "Short"
HAUL_MEDIUM = "Medium"
HAUL_LONG = "Long"

# Fields that must be present in the column map; year/month/day_of_week are
# derived from flight_date when not mapped explicitly.
REQUIRED_FIELDS = (
    "flight_date",
    "marketing_carrier",
    "operating_carrier",
    "origin_state",
    "dest_state",
    "scheduled_dep_time",
    "scheduled_arr_time",
    "dep_delay_minutes",
    "arr_delay_minutes",
    "distance_miles",
    "cancelled",
    "diverted",
)
OPTIONAL_FIELDS = ("year", "month", "day_of_week")

CATEGORICAL_FEATURES = (
    "marketing_carrier",
    "operating_carrier",
    "origin_state",
    "dest_state",
    "month",
    "day_of_week",
    "distance_group",
    "haul",
)
NUMERIC_FEATURES = ("distance_miles", "scheduled_dep_time", "scheduled_arr_time")


@dataclass(frozen=True)
class FlightRecord:
    flight_date: date
    year: int
    month: int
    day_of_week: int
    marketing_carrier: str
    operating_carrier: str
    origin_state: str
    dest_state: str
    scheduled_dep_time: int  # minutes since midnight, 0..1439
    scheduled_arr_time: int
    dep_delay_minutes: float
    arr_delay_minutes: float
    distance_miles: float
    cancelled: bool = False
    diverted: bool = False


@dataclass(frozen=True)
class DelayLabels:
    departure_delayed: int
    arrival_delayed: int
    total_delayed: int


@dataclass
class SkipReport:
    kept: int = 0
    reasons: dict = field(default_factory=dict)

    @property
    def skipped(self):
        return sum(self.reasons.values())

    def count(self, reason):
        self.reasons[reason] = self.reasons.get(reason, 0) + 1

    def render(self):
        lines = [f"rows kept: {self.kept}", f"rows skipped: {self.skipped}"]
        for reason in sorted(self.reasons):
            lines.append(f"  {reason}: {self.reasons[reason]}")
        return "\n".join(lines) + "\n"


class FlightTable:
    """Immutable list of parsed flight records."""

    def __init__(self, records):
        self._records = tuple(records)

    @property
    def records(self):
        return self._records

    def __len__(self):
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    def __getitem__(self, i):
        return self._records[i]


def _parse_date(text):
    text = text.strip()
    try:
        return date.fromisoformat(text.split(" ")[0])
    except ValueError:
        pass
    for fmt in ("%m/%d/%Y", "%m/%d/%y"):
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unparseable date: {text!r}")


def _parse_hhmm(text):
    """Scheduled times arrive as hhmm clock values; convert to minutes."""
    v = int(float(text))
    minutes = (v // 100) * 60 + v % 100
    return minutes % 1440  # BTS writes midnight as 2400


def _parse_bool(text):
    return text.strip().lower() in ("1", "1.0", "1.00", "true", "t", "yes", "y")


def parse_records(csv_source, column_map):
    """Parse a BTS-style CSV into a FlightTable plus a SkipReport.

    csv_source is a path or a file-like object. column_map maps each
    FlightRecord field name to its CSV column header.
    """
    missing = [f for f in REQUIRED_FIELDS if f not in column_map]
    if missing:
        raise SchemaError(f"column map missing fields: {', '.join(missing)}")

    if hasattr(csv_source, "read"):
        handle = csv_source
        close = False
    else:
        handle = open(csv_source, "r", newline="", encoding="utf-8")
        close = True
    try:
        return _parse_stream(handle, column_map)
    finally:
        if close:
            handle.close()


def _parse_stream(handle, column_map):
    reader = csv.DictReader(handle)
    if reader.fieldnames is None:
        raise EmptyTableError("CSV has no header row")
    header = set(reader.fieldnames)
    for fld, col in column_map.items():
        if col not in header:
            raise SchemaError(f"mapped column {col!r} (field {fld!r}) not in CSV header")

    report = SkipReport()
    records = []
    for row in reader:
        rec = _parse_row(row, column_map, report)
        if rec is not None:
            records.append(rec)
    if not records and report.skipped == 0:
        raise EmptyTableError("CSV contains a header but no data rows")
    report.kept = len(records)
    return FlightTable(records), report


def _parse_row(row, cmap, report):
    def raw(fld):
        return row.get(cmap[fld], "") if fld in cmap else ""

    if _parse_bool(raw("cancelled")):
        report.count("cancelled")
        return None
    if _parse_bool(raw("diverted")):
        report.count("diverted")
        return None

    try:
        dep_delay = float(raw("dep_delay_minutes"))
        arr_delay = float(raw("arr_delay_minutes"))
    except ValueError:
        report.count("missing or unparseable delay")
        return None

    try:
        fdate = _parse_date(raw("flight_date"))
        year = int(float(raw("year"))) if raw("year") else fdate.year
        month = int(float(raw("month"))) if raw("month") else fdate.month
        dow = int(float(raw("day_of_week"))) if raw("day_of_week") else fdate.isoweekday()
        dep_time = _parse_hhmm(raw("scheduled_dep_time"))
        arr_time = _parse_hhmm(raw("scheduled_arr_time"))
        distance = float(raw("distance_miles"))
    except ValueError:
        report.count("unparseable field")
        return None

    if distance < 0 or not (1 <= month <= 12) or not (1 <= dow <= 7):
        report.count("out-of-range field")
        return None

    return FlightRecord(
        flight_date=fdate,
        year=year,
        month=month,
        day_of_week=dow,
        marketing_carrier=raw("marketing_carrier").strip(),
        operating_carrier=raw("operating_carrier").strip(),
        origin_state=raw("origin_state").strip(),
        dest_state=raw("dest_state").strip(),
        scheduled_dep_time=dep_time,
        scheduled_arr_time=arr_time,
        dep_delay_minutes=dep_delay,
        arr_delay_minutes=arr_delay,
        distance_miles=distance,
    )


def derive_labels(record, threshold_minutes, total_rule="or"):
    """Binary delay labels at the given minute threshold.

    total_rule: "or" marks the flight delayed when either leg is;
    "arrival" mirrors the arrival label.
    """
    dep = 1 if record.dep_delay_minutes >= threshold_minutes else 0
    arr = 1 if record.arr_delay_minutes >= threshold_minutes else 0
    total = arr if total_rule == "arrival" else (dep | arr)
    return DelayLabels(dep, arr, total)


def distance_group(distance_miles):
    """250-mile distance buckets, classes 0..10 (left-inclusive)."""
    if distance_miles < 0:
        raise DomainError(f"negative distance: {distance_miles}")
    return min(int(distance_miles // 250), 10)


def haul_category(distance_miles):
    """Short [0, 800), Medium [800, 2200], Long (2200, inf)."""
    if distance_miles < 0:
        raise DomainError(f"negative distance: {distance_miles}")
    if distance_miles < 800:
        return HAUL_SHORT
    if distance_miles <= 2200:
        return HAUL_MEDIUM
    return HAUL_LONG


def stratified_monthly_sample(table, n_per_month, seed):
    """Uniform without-replacement sample of n_per_month rows per (year, month)."""
    if len(table) == 0:
        raise EmptyTableError("cannot sample an empty table")
    if n_per_month < 1:
        raise DomainError("n_per_month must be >= 1")

    groups = {}
    for idx, rec in enumerate(table):
        groups.setdefault((rec.year, rec.month), []).append(idx)

    rng = np.random.default_rng(seed)
    chosen = []
    for key in sorted(groups):
        idxs = groups[key]
        if len(idxs) < n_per_month:
            warnings.warn(
                f"month {key} has only {len(idxs)} rows (< {n_per_month}); keeping all"
            )
            chosen.extend(idxs)
        else:
            pick = rng.choice(len(idxs), size=n_per_month, replace=False)
            chosen.extend(idxs[i] for i in sorted(pick))
    return FlightTable(table[i] for i in chosen)


# ---------------------------------------------------------------------------
# Feature encoding


@dataclass(frozen=True)
class ColumnSpec:
    source: str
    encoding: str  # "numeric-standardized" or "one-hot"
    level: object = None  # one-hot only
    mean: float = 0.0  # numeric only
    std: float = 1.0

    @property
    def name(self):
        if self.encoding == "one-hot":
            return f"{self.source}={self.level}"
        return self.source


@dataclass(frozen=True)
class FeatureSchema:
    columns: tuple

    @property
    def width(self):
        return len(self.columns)

    def to_dict(self):
        return {
            "columns": [
                {
                    "source": c.source,
                    "encoding": c.encoding,
                    "level": c.level,
                    "mean": c.mean,
                    "std": c.std,
                }
                for c in self.columns
            ]
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(
                ColumnSpec(c["source"], c["encoding"], c["level"], c["mean"], c["std"])
                for c in d["columns"]
            )
        )


def _field_value(record, name):
    if name == "distance_group":
        return distance_group(record.distance_miles)
    if name == "haul":
        return haul_category(record.distance_miles)
    if name == "dep_hour":
        return record.scheduled_dep_time // 60
    if name == "arr_hour":
        return record.scheduled_arr_time // 60
    if name == "state":
        return record.origin_state
    if name == "carrier":
        return record.marketing_carrier
    try:
        return getattr(record, name)
    except AttributeError:
        raise SchemaError(f"unknown field: {name!r}") from None


@dataclass
class FeatureMatrix:
    values: np.ndarray  # (n, width) float64
    schema: FeatureSchema
    labels: dict  # task -> (n,) array of {0,1}

    @property
    def rows(self):
        return self.values.shape[0]


def fit_schema(table):
    """Build a FeatureSchema from a training table.

    One-hot groups use the full sorted set of distinct training levels;
    numeric columns record training mean and standard deviation.
    """
    if len(table) == 0:
        raise EmptyTableError("cannot fit a schema on an empty table")
    cols = []
    for fld in CATEGORICAL_FEATURES:
        levels = sorted({_field_value(r, fld) for r in table})
        cols.extend(ColumnSpec(fld, "one-hot", level=lv) for lv in levels)
    for fld in NUMERIC_FEATURES:
        vals = np.array([float(_field_value(r, fld)) for r in table])
        std = float(vals.std())
        cols.append(
            ColumnSpec(fld, "numeric-standardized", mean=float(vals.mean()),
                       std=std if std > 0 else 1.0)
        )
    return FeatureSchema(tuple(cols))


def encode(table, schema_or_fit, threshold_minutes, total_rule="or"):
    """Encode a FlightTable into a FeatureMatrix.

    Pass a FeatureSchema to apply an existing fit, or the string "fit" to
    fit the schema on this table first. Categories unseen at fit time
    encode as all-zero within their one-hot group.
    """
    if schema_or_fit == "fit":
        schema = fit_schema(table)
    elif isinstance(schema_or_fit, FeatureSchema):
        schema = schema_or_fit
    else:
        raise SchemaError("expected a FeatureSchema or the string 'fit'")

    n = len(table)
    values = np.zeros((n, schema.width))
    for j, col in enumerate(schema.columns):
        if col.encoding == "one-hot":
            for i, rec in enumerate(table):
                if _field_value(rec, col.source) == col.level:
                    values[i, j] = 1.0
        else:
            raw = np.array([float(_field_value(r, col.source)) for r in table])
            values[:, j] = (raw - col.mean) / col.std
    if not np.isfinite(values).all():
        raise SchemaError("encoding produced non-finite values")

    labels = {t: np.zeros(n, dtype=np.int64) for t in TASKS}
    for i, rec in enumerate(table):
        lab = derive_labels(rec, threshold_minutes, total_rule)
        labels["departure"][i] = lab.departure_delayed
        labels["arrival"][i] = lab.arrival_delayed
        labels["total"][i] = lab.total_delayed
    return FeatureMatrix(values, schema, labels)


def split_indices(n, train_fraction, seed):
    """Disjoint train/test index partition: round(n * fraction) train rows."""
    if not 0 < train_fraction < 1:
        raise DomainError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = round(n * train_fraction)
    return perm[:n_train], perm[n_train:]


def train_test_split(matrix, train_fraction, seed):
    """Random disjoint partition of a FeatureMatrix."""
    tr, te = split_indices(matrix.rows, train_fraction, seed)

    def take(idx):
        return FeatureMatrix(
            matrix.values[idx],
            matrix.schema,
            {t: v[idx] for t, v in matrix.labels.items()},
        )

    return take(tr), take(te)


def split_table(table, train_fraction, seed):
    """Same partition semantics as train_test_split, applied to raw records."""
    tr, te = split_indices(len(table), train_fraction, seed)
    return FlightTable(table[i] for i in tr), FlightTable(table[i] for i in te)


GROUP_KEYS = (
    "state",
    "month",
    "day_of_week",
    "dep_hour",
    "arr_hour",
    "distance_group",
    "haul",
    "carrier",
)


def delay_rate_by(table, key, threshold_minutes, task, total_rule="or"):
    """Per-group (key value, flight count, delayed count, rate) rows, key-sorted."""
    if len(table) == 0:
        raise EmptyTableError("cannot aggregate an empty table")
    if key not in GROUP_KEYS:
        raise DomainError(f"unknown grouping key: {key!r}")
    if task not in TASKS:
        raise DomainError(f"unknown task: {task!r}")

    counts = {}
    for rec in table:
        k = _field_value(rec, key)
        lab = derive_labels(rec, threshold_minutes, total_rule)
        delayed = getattr(lab, f"{task}_delayed") if task != "total" else lab.total_delayed
        total, hits = counts.get(k, (0, 0))
        counts[k] = (total + 1, hits + delayed)
    return [
        (k, total, hits, hits / total)
        for k, (total, hits) in sorted(counts.items())
    ]


def table_to_csv(table, path):
    """Persist a FlightTable so downstream commands can reload it."""
    fields = [
        "flight_date", "year", "month", "day_of_week", "marketing_carrier",
        "operating_carrier", "origin_state", "dest_state", "scheduled_dep_time",
        "scheduled_arr_time", "dep_delay_minutes", "arr_delay_minutes",
        "distance_miles",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for rec in table:
            writer.writerow([getattr(rec, f) for f in fields])


def table_from_csv(path):
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        records = []
        for row in reader:
            records.append(
                FlightRecord(
                    flight_date=date.fromisoformat(row["flight_date"]),
                    year=int(row["year"]),
                    month=int(row["month"]),
                    day_of_week=int(row["day_of_week"]),
                    marketing_carrier=row["marketing_carrier"],
                    operating_carrier=row["operating_carrier"],
                    origin_state=row["origin_state"],
                    dest_state=row["dest_state"],
                    scheduled_dep_time=int(row["scheduled_dep_time"]),
                    scheduled_arr_time=int(row["scheduled_arr_time"]),
                    dep_delay_minutes=float(row["dep_delay_minutes"]),
                    arr_delay_minutes=float(row["arr_delay_minutes"]),
                    distance_miles=float(row["distance_miles"]),
                )
            )
    return FlightTable(records)
