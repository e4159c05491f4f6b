"""Region x date survey panels.

A :class:`PanelDataset` stores one row per observation key (region, date and,
when present, the demographic bucket) and one dense float column per signal.
Missing cells are ``nan``.  Categorical demographic values (``"female"``,
``"18-34"``) are stored as integer codes with the level names kept on the
column metadata, so the whole panel stays a single real matrix.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyDataset,
    InsufficientRows,
    MissingHeader,
    TargetWouldBeDropped,
    UnknownColumn,
    UnknownTargetColumn,
    ValidationError,
)

KINDS = (
    "demographic",
    "weighted_signal",
    "unweighted_signal",
    "testing_related",
    "derived",
    "mean_scale",
    "target",
    "other",
)
UNITS = ("percent", "count", "unitless")

_PERCENT_KINDS = {"weighted_signal", "unweighted_signal", "testing_related", "derived", "target"}
_MISSING_TOKENS = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: str = "other"
    units: str = "unitless"
    levels: tuple[str, ...] | None = None  # categorical code -> label

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.units not in UNITS:
            raise ValidationError(f"column {self.name!r}: unknown units {self.units!r}")


@dataclass(frozen=True)
class PanelSchema:
    """Column-role configuration, usually loaded from a JSON file."""

    target: str
    region_column: str = "region"
    date_column: str = "date"
    demographic: tuple[str, ...] = ()
    testing_related: tuple[str, ...] = ()
    derived: tuple[str, ...] = ()
    mean_scale: tuple[str, ...] = ()
    weighted_suffix: str = "_weighted"
    unweighted_suffix: str = "_unweighted"
    magnitude_threshold: float = 1e6
    units: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping) -> "PanelSchema":
        if "target" not in d:
            raise ValidationError("schema config needs a 'target' key")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown schema keys: {sorted(extra)}")
        kw = dict(d)
        for key in ("demographic", "testing_related", "derived", "mean_scale"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "magnitude_threshold" in kw:
            kw["magnitude_threshold"] = float(kw["magnitude_threshold"])
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "PanelSchema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "region_column": self.region_column,
            "date_column": self.date_column,
            "demographic": list(self.demographic),
            "testing_related": list(self.testing_related),
            "derived": list(self.derived),
            "mean_scale": list(self.mean_scale),
            "weighted_suffix": self.weighted_suffix,
            "unweighted_suffix": self.unweighted_suffix,
            "magnitude_threshold": self.magnitude_threshold,
            "units": dict(sorted(self.units.items())),
        }

    def prune_config(self) -> "PruneConfig":
        return PruneConfig(
            weighted_suffix=self.weighted_suffix,
            unweighted_suffix=self.unweighted_suffix,
            magnitude_threshold=self.magnitude_threshold,
        )


@dataclass(frozen=True)
class PruneConfig:
    weighted_suffix: str = "_weighted"
    unweighted_suffix: str = "_unweighted"
    magnitude_threshold: float = 1e6
    drop_demographic: bool = True
    drop_unweighted_twins: bool = True
    drop_testing_related: bool = True
    drop_derived: bool = True
    drop_magnitude: bool = True


@dataclass(frozen=True)
class SplitSpec:
    mode: str = "random_row"
    train_fraction: float = 0.8
    horizon: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("random_row", "chronological_tail"):
            raise ValidationError(f"unknown split mode {self.mode!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must lie in (0, 1)")
        if self.horizon < 1:
            raise ValidationError("horizon must be a positive number of days")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the planted synthetic panel.

    Each region carries ``n_signals`` independent AR(1) latent series with
    unit stationary variance, observed with Gaussian noise ``obs_sigma``.
    The raw target is ``sum_j planted_weights[j] * signal_j`` plus
    ``N(0, noise_sigma)``, then mapped affinely onto
    ``[target_low, target_high]``.  Emitted signals are ``50 + 8 * raw``.
    """

    n_regions: int = 8
    n_days: int = 150
    n_signals: int = 10
    planted_weights: tuple[float, ...] = (5.0, 1.0, 0.1)
    noise_sigma: float = 0.01
    ar_coefficient: float = 0.5
    seed: int = 0
    obs_sigma: float = 0.1
    region_offset_sigma: float = 0.0
    target_low: float = 1.0
    target_high: float = 21.0
    start_date: str = "2020-04-04"
    target_name: str = "pct_tested_positive"

    def __post_init__(self):
        object.__setattr__(self, "planted_weights", tuple(float(w) for w in self.planted_weights))
        for name in ("n_regions", "n_days", "n_signals"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if len(self.planted_weights) > self.n_signals:
            raise ValidationError("more planted weights than signals")
        if self.noise_sigma < 0 or self.obs_sigma < 0 or self.region_offset_sigma < 0:
            raise ValidationError("noise scales must be nonnegative")
        if not -1.0 < self.ar_coefficient < 1.0:
            raise ValidationError("ar_coefficient must lie in (-1, 1)")
        if not 0.0 <= self.target_low < self.target_high <= 100.0:
            raise ValidationError("target range must satisfy 0 <= low < high <= 100")
        date.fromisoformat(self.start_date)

    def to_dict(self) -> dict:
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d["planted_weights"] = list(self.planted_weights)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "SyntheticSpec":
        extra = set(d) - set(cls.__dataclass_fields__)
        if extra:
            raise ValidationError(f"unknown synthetic spec keys: {sorted(extra)}")
        return cls(**d)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PanelDataset:
    region: np.ndarray  # (n,) object array of region ids
    date: np.ndarray  # (n,) datetime64[D]
    columns: tuple[ColumnMeta, ...]
    values: np.ndarray  # (n, c) float, nan = missing
    target: str
    flags: np.ndarray | None = None  # (n,) bool, True = failed range validation
    audit: tuple[dict, ...] = ()

    def __post_init__(self):
        region = np.asarray(self.region, dtype=object)
        dates = np.asarray(self.date, dtype="datetime64[D]")
        values = np.asarray(self.values, dtype=float)
        n = len(region)
        if values.ndim != 2 or values.shape != (n, len(self.columns)):
            raise ValidationError(
                f"values shape {values.shape} does not match {n} rows x {len(self.columns)} columns"
            )
        if len(dates) != n:
            raise ValidationError("date array length differs from region array length")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dup = sorted({x for x in names if names.count(x) > 1})
            raise ValidationError(f"duplicate column names: {dup}")
        if self.target not in names:
            raise UnknownTargetColumn(f"target column {self.target!r} not among columns")
        targets = [c.name for c in self.columns if c.kind == "target"]
        if targets != [self.target]:
            raise ValidationError(f"exactly one target column required, found {targets}")
        flags = np.zeros(n, bool) if self.flags is None else np.asarray(self.flags, bool)
        object.__setattr__(self, "region", _readonly(region))
        object.__setattr__(self, "date", _readonly(dates))
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "flags", _readonly(flags))
        object.__setattr__(self, "audit", tuple(self.audit))
        self._check_keys()

    def _group_keys(self) -> list[np.ndarray]:
        keys = [self.region.astype(str)]
        for c in self.columns:
            if c.kind == "demographic":
                keys.append(self.column(c.name))
        return keys

    def _check_keys(self):
        if len(self.region) < 2:
            return
        keys = self._group_keys()
        order = np.lexsort([self.date] + keys[::-1])
        same_group = np.ones(len(order) - 1, bool)
        for k in keys:
            ks = k[order]
            same_group &= ks[1:] == ks[:-1]
        d = self.date[order]
        bad = same_group & (d[1:] <= d[:-1])
        if bad.any():
            i = order[1:][bad][0]
            raise ValidationError(
                f"duplicate date {self.date[i]} for region {self.region[i]!r}"
            )

    # -- accessors ---------------------------------------------------------
    @property
    def n_rows(self) -> int:
        return len(self.region)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def regions(self) -> list[str]:
        return sorted(set(self.region.tolist()))

    @property
    def dates(self) -> np.ndarray:
        return np.unique(self.date)

    @property
    def feature_names(self) -> list[str]:
        """Modeling candidates: every column that is neither target nor demographic."""
        return [c.name for c in self.columns if c.kind not in ("target", "demographic")]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownColumn(f"unknown column {name!r}") from None

    def meta(self, name: str) -> ColumnMeta:
        return self.columns[self.index(name)]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.index(name)]

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        idx = [self.index(n) for n in names]
        return self.values[:, idx]

    def complete_rows(self, names: Sequence[str]) -> np.ndarray:
        """Rows with no missing value in ``names`` (and in the target)."""
        cols = list(dict.fromkeys(list(names) + [self.target]))
        return ~np.isnan(self.matrix(cols)).any(axis=1)

    def xy(self, features: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """Design matrix and target over rows complete in ``features``."""
        keep = self.complete_rows(features)
        return self.matrix(features)[keep], self.column(self.target)[keep]

    def take(self, rows) -> "PanelDataset":
        rows = np.asarray(rows)
        return replace(
            self,
            region=self.region[rows],
            date=self.date[rows],
            values=self.values[rows],
            flags=self.flags[rows],
        )

    def drop_columns(self, names: Iterable[str]) -> "PanelDataset":
        names = set(names)
        if self.target in names:
            raise TargetWouldBeDropped(f"refusing to drop target column {self.target!r}")
        keep = [i for i, c in enumerate(self.columns) if c.name not in names]
        return replace(
            self,
            columns=tuple(self.columns[i] for i in keep),
            values=self.values[:, keep],
        )

    def region_series(self, region: str, names: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """Date-ordered ``(dates, T x k)`` block for one region."""
        rows = np.flatnonzero(self.region == region)
        if rows.size == 0:
            raise UnknownColumn(f"unknown region {region!r}")
        rows = rows[np.argsort(self.date[rows], kind="stable")]
        return self.date[rows], self.matrix(names)[rows]

    def sorted(self) -> "PanelDataset":
        keys = self._group_keys()
        order = np.lexsort([self.date] + keys[::-1])
        return self.take(order)

    def decode(self, name: str) -> np.ndarray:
        """Column values with categorical codes mapped back to labels."""
        meta = self.meta(name)
        col = self.column(name)
        if meta.levels is None:
            return col
        out = np.empty(len(col), dtype=object)
        for i, v in enumerate(col):
            out[i] = None if np.isnan(v) else meta.levels[int(v)]
        return out


# -- ingestion ---------------------------------------------------------------


def classify_columns(names: Sequence[str], schema: PanelSchema) -> dict[str, str]:
    """Kind per column from explicit schema lists, then suffix rules."""
    present = set(names)
    kinds = {}
    for name in names:
        if name == schema.target:
            kind = "target"
        elif name in schema.demographic:
            kind = "demographic"
        elif name in schema.testing_related:
            kind = "testing_related"
        elif name in schema.derived:
            kind = "derived"
        elif name in schema.mean_scale:
            kind = "mean_scale"
        elif name.endswith(schema.unweighted_suffix):
            kind = "unweighted_signal"
        elif name.endswith(schema.weighted_suffix):
            kind = "weighted_signal"
        elif name + schema.weighted_suffix in present:
            kind = "unweighted_signal"
        else:
            kind = "other"
        kinds[name] = kind
    return kinds


def _default_units(kind: str) -> str:
    return "percent" if kind in _PERCENT_KINDS else "unitless"


def _parse_number(text: str) -> float | None:
    t = text.strip()
    if t.lower() in _MISSING_TOKENS:
        return math.nan
    try:
        return float(t)
    except ValueError:
        return None


def ingest_csv(path, schema: PanelSchema) -> PanelDataset:
    """Read and validate a panel CSV.

    Rows with an unparseable date, a non-numeric signal cell, a wrong field
    count or a duplicate key are excluded and recorded in ``dataset.audit``.
    Percent-unit cells outside [0, 100] keep their row but flag it.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise MissingHeader(f"{path}: no header row")
        header = [h.strip() for h in header]
        for needed in (schema.region_column, schema.date_column):
            if needed not in header:
                raise MissingHeader(f"{path}: header lacks required column {needed!r}")
        if schema.target not in header:
            raise UnknownTargetColumn(f"{path}: target column {schema.target!r} not in header")
        raw_rows = [(lineno, row) for lineno, row in enumerate(reader, start=2) if row]

    ri, di = header.index(schema.region_column), header.index(schema.date_column)
    names = [h for h in header if h not in (schema.region_column, schema.date_column)]
    if len(set(names)) != len(names):
        raise MissingHeader(f"{path}: duplicate column names in header")
    col_pos = [header.index(n) for n in names]
    kinds = classify_columns(names, schema)

    audit: list[dict] = []
    parsed = []
    for lineno, row in raw_rows:
        if len(row) != len(header):
            audit.append({"row": lineno, "reason": f"expected {len(header)} fields, got {len(row)}"})
            continue
        try:
            d = date.fromisoformat(row[di].strip())
        except ValueError:
            audit.append({"row": lineno, "reason": f"unparseable date {row[di]!r}"})
            continue
        parsed.append((lineno, row[ri].strip(), d, [row[p] for p in col_pos]))

    # demographic columns may be categorical; decide per column over all rows
    levels: dict[str, tuple[str, ...] | None] = {}
    for j, name in enumerate(names):
        if kinds[name] != "demographic":
            continue
        cells = [r[3][j].strip() for r in parsed]
        if all(_parse_number(c) is not None for c in cells):
            levels[name] = None
        else:
            levels[name] = tuple(sorted({c for c in cells if c.lower() not in _MISSING_TOKENS}))

    keep_rows, regions, dates, values = [], [], [], []
    for lineno, reg, d, cells in parsed:
        vals = []
        bad = None
        for name, cell in zip(names, cells):
            lv = levels.get(name)
            if lv is not None:
                c = cell.strip()
                vals.append(math.nan if c.lower() in _MISSING_TOKENS else float(lv.index(c)))
                continue
            v = _parse_number(cell)
            if v is None:
                bad = name
                break
            vals.append(v)
        if bad is not None:
            audit.append({"row": lineno, "column": bad, "reason": f"non-numeric cell {cell!r}"})
            continue
        keep_rows.append(lineno)
        regions.append(reg)
        dates.append(d)
        values.append(vals)

    if not keep_rows:
        raise EmptyDataset(f"{path}: no admissible rows")

    columns = tuple(
        ColumnMeta(
            name=n,
            kind=kinds[n],
            units=schema.units.get(n, _default_units(kinds[n])),
            levels=levels.get(n),
        )
        for n in names
    )
    values = np.array(values, dtype=float).reshape(len(keep_rows), len(names))
    region_arr = np.array(regions, dtype=object)
    date_arr = np.array(dates, dtype="datetime64[D]")
    linenos = np.array(keep_rows)

    # duplicate keys: keep first occurrence in file order
    demo_idx = [j for j, c in enumerate(columns) if c.kind == "demographic"]
    seen: set = set()
    unique = []
    for i in range(len(linenos)):
        key = (region_arr[i], date_arr[i]) + tuple(
            None if np.isnan(values[i, j]) else values[i, j] for j in demo_idx
        )
        if key in seen:
            audit.append({"row": int(linenos[i]), "reason": "duplicate key"})
            continue
        seen.add(key)
        unique.append(i)
    unique = np.array(unique)

    flags, range_audit = _range_flags(columns, values[unique], linenos[unique])
    audit.extend(range_audit)
    audit.sort(key=lambda e: (e.get("row", 0), e.get("column", "")))
    ds = PanelDataset(
        region=region_arr[unique],
        date=date_arr[unique],
        columns=columns,
        values=values[unique],
        target=schema.target,
        flags=flags,
        audit=tuple(audit),
    )
    return ds.sorted()


def _range_flags(columns, values, linenos):
    flags = np.zeros(len(values), bool)
    audit = []
    for j, c in enumerate(columns):
        if c.units != "percent":
            continue
        col = values[:, j]
        with np.errstate(invalid="ignore"):
            out = (col < 0) | (col > 100)
        for i in np.flatnonzero(out):
            audit.append({"row": int(linenos[i]), "column": c.name, "reason": "percent out of [0, 100]"})
        flags |= out
    return flags, audit


def format_number(v: float) -> str:
    if np.isnan(v):
        return ""
    return "%.12g" % v


def write_csv(ds: PanelDataset, path, region_column="region", date_column="date") -> None:
    """Write ``ds`` in the ingest layout (12 significant digits)."""
    from .io import atomic_writer

    names = ds.names
    decoded = {n: ds.decode(n) for n in names if ds.meta(n).levels is not None}
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([region_column, date_column] + names)
        for i in range(ds.n_rows):
            cells = [ds.region[i], str(ds.date[i])]
            for j, n in enumerate(names):
                if n in decoded:
                    lab = decoded[n][i]
                    cells.append("" if lab is None else lab)
                else:
                    cells.append(format_number(ds.values[i, j]))
            w.writerow(cells)


def schema_for(ds: PanelDataset, **overrides) -> PanelSchema:
    """Schema that reproduces ``ds``'s column roles when re-ingesting its CSV."""
    by_kind = {k: tuple(c.name for c in ds.columns if c.kind == k) for k in KINDS}
    units = {c.name: c.units for c in ds.columns if c.units != _default_units(c.kind)}
    kw = dict(
        target=ds.target,
        demographic=by_kind["demographic"],
        testing_related=by_kind["testing_related"],
        derived=by_kind["derived"],
        mean_scale=by_kind["mean_scale"],
        units=units,
    )
    kw.update(overrides)
    return PanelSchema(**kw)


def write_audit(entries: Iterable[Mapping], path) -> None:
    from .io import atomic_writer

    with atomic_writer(path) as fh:
        for e in entries:
            fh.write(json.dumps(dict(e), sort_keys=True) + "\n")


# -- pruning -----------------------------------------------------------------


def _twin_of(name: str, cfg: PruneConfig) -> str:
    stem = name[: -len(cfg.unweighted_suffix)] if name.endswith(cfg.unweighted_suffix) else name
    return stem + cfg.weighted_suffix


def prune_features(ds: PanelDataset, rules: PruneConfig | None = None):
    """Drop columns that should not feed the regressors.

    Rules run in a fixed order: demographic columns, unweighted columns whose
    weighted twin is present, testing-related columns, derived columns, then
    any column whose largest absolute value exceeds the magnitude threshold.

    Returns
    -------
    (PanelDataset, list of (column, reason))
    """
    rules = rules or PruneConfig()
    if ds.target not in ds.names:
        raise UnknownTargetColumn(f"target column {ds.target!r} not present")
    audit: list[tuple[str, str]] = []
    present = ds.names

    def mark(pred, reason, enabled):
        if not enabled:
            return
        dropped = {c for c, _ in audit}
        for c in ds.columns:
            if c.name not in dropped and pred(c):
                audit.append((c.name, reason))

    mark(lambda c: c.kind == "demographic", "demographic", rules.drop_demographic)
    mark(
        lambda c: c.kind == "unweighted_signal" and _twin_of(c.name, rules) in present,
        "unweighted_twin",
        rules.drop_unweighted_twins,
    )
    mark(lambda c: c.kind == "testing_related", "testing_related", rules.drop_testing_related)
    mark(lambda c: c.kind == "derived", "derived", rules.drop_derived)
    if rules.drop_magnitude:
        with np.errstate(invalid="ignore"):
            peak = {
                c.name: np.nanmax(np.abs(ds.values[:, j])) if ds.n_rows and not np.isnan(ds.values[:, j]).all() else 0.0
                for j, c in enumerate(ds.columns)
            }
        if peak[ds.target] > rules.magnitude_threshold:
            raise TargetWouldBeDropped(
                f"target {ds.target!r} exceeds magnitude threshold {rules.magnitude_threshold:g}"
            )
        mark(lambda c: peak[c.name] > rules.magnitude_threshold, "magnitude", True)
    if any(c == ds.target for c, _ in audit):
        raise TargetWouldBeDropped(f"prune rules match target {ds.target!r}")
    return ds.drop_columns(c for c, _ in audit), audit


# -- splitting ---------------------------------------------------------------


def split(ds: PanelDataset, spec: SplitSpec):
    """Partition the admitted rows (target present) into train and test."""
    admitted = np.flatnonzero(~np.isnan(ds.column(ds.target)))
    n = len(admitted)
    if spec.mode == "random_row":
        if n < 2:
            raise InsufficientRows(f"random split needs >= 2 admitted rows, have {n}")
        rng = np.random.default_rng(spec.seed)
        perm = admitted[rng.permutation(n)]
        n_train = min(max(math.ceil(spec.train_fraction * n - 1e-9), 1), n - 1)
        return ds.take(np.sort(perm[:n_train])), ds.take(np.sort(perm[n_train:]))

    train, test = [], []
    for reg in ds.regions:
        rows = admitted[ds.region[admitted] == reg]
        uniq = np.unique(ds.date[rows])
        if len(uniq) <= spec.horizon:
            raise InsufficientRows(
                f"region {reg!r} has {len(uniq)} dates, need more than horizon {spec.horizon}"
            )
        cut = uniq[-spec.horizon]
        late = ds.date[rows] >= cut
        test.append(rows[late])
        train.append(rows[~late])
    return ds.take(np.sort(np.concatenate(train))), ds.take(np.sort(np.concatenate(test)))


# -- synthetic panels --------------------------------------------------------


def generate_synthetic(spec: SyntheticSpec) -> PanelDataset:
    rng = np.random.default_rng(spec.seed)
    R, T, k = spec.n_regions, spec.n_days, spec.n_signals
    phi = spec.ar_coefficient
    innov = math.sqrt(1.0 - phi * phi)

    latent = np.empty((R, T, k))
    offsets = spec.region_offset_sigma * rng.standard_normal((R, 1, k))
    latent[:, 0] = rng.standard_normal((R, k))
    shocks = rng.standard_normal((R, T, k))
    for t in range(1, T):
        latent[:, t] = phi * latent[:, t - 1] + innov * shocks[:, t]
    raw = latent + offsets + spec.obs_sigma * rng.standard_normal((R, T, k))

    w = np.zeros(k)
    w[: len(spec.planted_weights)] = spec.planted_weights
    y_raw = raw @ w + spec.noise_sigma * rng.standard_normal((R, T))
    lo, hi = y_raw.min(), y_raw.max()
    if hi > lo:
        y = spec.target_low + (spec.target_high - spec.target_low) * (y_raw - lo) / (hi - lo)
    else:
        y = np.full_like(y_raw, spec.target_low)
    y = np.clip(y, 0.0, 100.0)
    signals = 50.0 + 8.0 * raw

    start = np.datetime64(spec.start_date, "D")
    regions = np.repeat(np.array([f"R{r}" for r in range(R)], dtype=object), T)
    dates = np.tile(start + np.arange(T), R)
    values = np.concatenate([signals.reshape(R * T, k), y.reshape(R * T, 1)], axis=1)
    columns = tuple(ColumnMeta(f"signal_{j}", "other", "percent") for j in range(k)) + (
        ColumnMeta(spec.target_name, "target", "percent"),
    )
    return PanelDataset(
        region=regions,
        date=dates,
        columns=columns,
        values=values,
        target=spec.target_name,
    )


# -- filtering ---------------------------------------------------------------


def group_filter(ds: PanelDataset, predicate: Mapping[str, object] | Callable) -> PanelDataset:
    """Row subset by column equality (``{"gender": "female"}``) or a callable.

    A callable receives the dataset and returns a boolean row mask.
    Categorical labels are matched against the column's level names.
    """
    if callable(predicate):
        mask = np.asarray(predicate(ds), bool)
    else:
        mask = np.ones(ds.n_rows, bool)
        for name, want in predicate.items():
            meta = ds.meta(name)
            col = ds.column(name)
            if meta.levels is not None:
                if isinstance(want, str):
                    if want not in meta.levels:
                        mask &= False
                        continue
                    want = meta.levels.index(want)
            mask &= col == float(want)
    if not mask.any():
        raise EmptyDataset(f"filter {predicate!r} matches no rows")
    return ds.take(np.flatnonzero(mask))
