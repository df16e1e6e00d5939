"""Experimental data model: observations, propensities, ground truth, CSV I/O."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np


class DataError(ValueError):
    """Raised when input data violates the data-model invariants."""


class NumericError(RuntimeError):
    """Raised when an optimizer or estimator produces non-finite values."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class Observation(NamedTuple):
    x: np.ndarray
    t: int
    y: int


@dataclass(frozen=True)
class Constant:
    """Constant treatment probability ``e`` for every row."""

    e: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.e < 1.0):
            raise DataError(f"propensity must lie in (0, 1), got {self.e}")

    def values(self, n: int) -> np.ndarray:
        return np.full(n, float(self.e))


@dataclass(frozen=True)
class PerObservation:
    """One known treatment probability per row."""

    e: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.e, dtype=float).ravel()
        if e.size and not np.all((e > 0.0) & (e < 1.0)):
            raise DataError("propensity must lie in (0, 1) for every row")
        object.__setattr__(self, "e", _frozen(e))

    def values(self, n: int) -> np.ndarray:
        if self.e.size != n:
            raise DataError(f"propensity has {self.e.size} entries for {n} rows")
        return np.asarray(self.e)


PropensitySpec = Union[Constant, PerObservation]


@dataclass(frozen=True)
class Theta:
    """False-positive weight of the weighted misclassification loss."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"theta must lie in [0, 1], got {v}")
        object.__setattr__(self, "value", v)

    def __float__(self):
        return self.value


def as_theta(theta) -> float:
    """Accept a :class:`Theta` or a bare float and return the checked float."""
    return Theta(float(theta)).value


@dataclass(frozen=True)
class Dataset:
    """Rows of ``(X, T, Y)`` from a randomized experiment.

    ``X`` is dense row-major ``(n, d)``; ``t`` and ``y`` are ``int8`` arrays
    in {-1, +1}.  Arrays are made read-only on construction.
    """

    X: np.ndarray
    t: np.ndarray
    y: np.ndarray
    propensity: PropensitySpec = field(default_factory=Constant)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "t", _frozen(np.asarray(self.t).astype(np.int8).ravel()))
        object.__setattr__(self, "y", _frozen(np.asarray(self.y).astype(np.int8).ravel()))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, i: int) -> Observation:
        return Observation(self.X[i], int(self.t[i]), int(self.y[i]))

    @property
    def e(self) -> np.ndarray:
        return self.propensity.values(self.n)

    @property
    def q(self) -> np.ndarray:
        """Probability of the observed assignment, ``1/2 + (e - 1/2) t``."""
        # exactly e or 1 - e, with no rounding from the affine form
        return np.where(self.t > 0, self.e, 1.0 - self.e)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        prop = self.propensity
        if isinstance(prop, PerObservation):
            prop = PerObservation(prop.e[idx])
        return Dataset(self.X[idx], self.t[idx], self.y[idx], prop)


@dataclass(frozen=True)
class GroundTruth:
    """Full potential outcomes for synthetic units (vectorised records)."""

    X: np.ndarray
    y_plus: np.ndarray
    y_minus: np.ndarray
    r: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", _frozen(np.asarray(self.X, dtype=float)))
        for name in ("y_plus", "y_minus", "r", "a"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name)).astype(np.int8)))
        if np.any(self.y_plus < self.y_minus):
            raise DataError("ground truth violates monotonicity y_plus >= y_minus")
        if np.any((self.r == 1) != (self.y_plus > self.y_minus)):
            raise DataError("responder label inconsistent with potential outcomes")

    def __len__(self):
        return self.X.shape[0]


def q_of(obs: Observation, prop: PropensitySpec, row_index: Optional[int] = None) -> float:
    """Probability of the assignment ``obs.t`` actually received."""
    if isinstance(prop, PerObservation):
        if row_index is None or not (0 <= row_index < prop.e.size):
            raise IndexError(f"row index {row_index} out of range for {prop.e.size} propensities")
        e = float(prop.e[row_index])
    else:
        e = prop.e
    return e if obs.t > 0 else 1.0 - e


@dataclass(frozen=True)
class ValidationReport:
    n: int
    d: int
    # counts keyed by (t, y)
    cells: dict

    def __str__(self):
        body = ", ".join(f"t={t:+d},y={y:+d}: {c}" for (t, y), c in sorted(self.cells.items()))
        return f"{self.n} rows, d={self.d} ({body})"


def validate_dataset(ds: Dataset) -> ValidationReport:
    if ds.n == 0:
        raise DataError("empty dataset")
    if not np.all(np.isin(ds.t, (-1, 1))):
        bad = int(np.flatnonzero(~np.isin(ds.t, (-1, 1)))[0])
        raise DataError(f"treatment must be ±1 (row {bad})")
    if not np.all(np.isin(ds.y, (-1, 1))):
        bad = int(np.flatnonzero(~np.isin(ds.y, (-1, 1)))[0])
        raise DataError(f"outcome must be ±1 (row {bad})")
    if not np.all(np.isfinite(ds.X)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(ds.X), axis=1))[0])
        raise DataError(f"non-finite feature value (row {bad})")
    e = ds.e
    if not np.all((e > 0) & (e < 1)):
        raise DataError("propensity outside (0, 1)")
    cells = {}
    for t in (-1, 1):
        for y in (-1, 1):
            cells[(t, y)] = int(np.sum((ds.t == t) & (ds.y == y)))
    return ValidationReport(ds.n, ds.d, cells)


# ---------------------------------------------------------------------------
# CSV ingestion / emission

def _fmt(v: float) -> str:
    return repr(float(v))


def _parse_label(raw: str, name: str, row: int, binary01: bool) -> int:
    try:
        v = float(raw)
    except ValueError:
        raise DataError(f"row {row}: column {name!r} is not numeric: {raw!r}") from None
    if binary01:
        if v not in (0.0, 1.0):
            raise DataError(f"row {row}: {name} must be 0 or 1 with --binary-01, got {raw!r}")
        return 1 if v == 1.0 else -1
    if v not in (-1.0, 1.0):
        label = "treatment" if name == "t" else "outcome"
        raise DataError(f"row {row}: {label} must be ±1, got {raw!r}")
    return int(v)


def read_dataset(path, binary01: bool = False, propensity: Optional[float] = None) -> Dataset:
    """Read ``x1,...,xd,t,y[,e]``.  Row numbers in errors count the header as row 1."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if "t" not in header or "y" not in header:
            raise DataError(f"{path}: header must contain 't' and 'y' columns")
        xcols = [i for i, h in enumerate(header) if h.startswith("x")]
        ti, yi = header.index("t"), header.index("y")
        ei = header.index("e") if "e" in header else None
        X, T, Y, E = [], [], [], []
        for rownum, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DataError(f"row {rownum}: expected {len(header)} fields, got {len(rec)}")
            try:
                xs = [float(rec[i]) for i in xcols]
            except ValueError:
                raise DataError(f"row {rownum}: non-numeric feature") from None
            if not all(math.isfinite(v) for v in xs):
                raise DataError(f"row {rownum}: non-finite feature value")
            X.append(xs)
            T.append(_parse_label(rec[ti], "t", rownum, binary01))
            Y.append(_parse_label(rec[yi], "y", rownum, binary01))
            if ei is not None:
                try:
                    e = float(rec[ei])
                except ValueError:
                    raise DataError(f"row {rownum}: non-numeric propensity") from None
                if not (0.0 < e < 1.0):
                    raise DataError(f"row {rownum}: propensity must lie in (0, 1), got {rec[ei]!r}")
                E.append(e)
    if not X:
        raise DataError(f"{path}: empty dataset")
    if ei is not None:
        prop: PropensitySpec = PerObservation(np.array(E))
    else:
        prop = Constant(0.5 if propensity is None else propensity)
    ds = Dataset(np.array(X, dtype=float).reshape(len(X), len(xcols)), np.array(T), np.array(Y), prop)
    validate_dataset(ds)
    return ds


def write_dataset(ds: Dataset, path, include_e: Optional[bool] = None) -> None:
    if include_e is None:
        include_e = isinstance(ds.propensity, PerObservation)
    header = [f"x{j + 1}" for j in range(ds.d)] + ["t", "y"] + (["e"] if include_e else [])
    e = ds.e
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(ds.n):
            row = [_fmt(v) for v in ds.X[i]] + [int(ds.t[i]), int(ds.y[i])]
            if include_e:
                row.append(_fmt(e[i]))
            w.writerow(row)


def write_ground_truth(gt: GroundTruth, path) -> None:
    d = gt.X.shape[1]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(d)] + ["y_plus", "y_minus", "r", "a"])
        for i in range(len(gt)):
            w.writerow([_fmt(v) for v in gt.X[i]]
                       + [int(gt.y_plus[i]), int(gt.y_minus[i]), int(gt.r[i]), int(gt.a[i])])


def read_ground_truth(path) -> GroundTruth:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        xcols = [i for i, h in enumerate(header) if h.startswith("x")]
        cols = {name: header.index(name) for name in ("y_plus", "y_minus", "r", "a")}
        X, rest = [], {k: [] for k in cols}
        for rownum, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                X.append([float(rec[i]) for i in xcols])
                for k, i in cols.items():
                    rest[k].append(int(float(rec[i])))
            except ValueError:
                raise DataError(f"row {rownum}: malformed ground-truth record") from None
    return GroundTruth(np.array(X).reshape(len(X), len(xcols)), **{k: np.array(v) for k, v in rest.items()})


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write a plain CSV table; floats are emitted at full round-trip precision."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_rows(path) -> list:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
