"""Data ingestion, rescaling, centering, and seeded simulation.

Samples carry their provenance and the affine transforms applied on the way
in, so every run is reproducible from the artifacts alone. The model prior
assumes zero-mean data, so centering is on by default and recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "DataSample",
    "ingest_csv",
    "simulate",
    "simulate_2d",
    "write_sample",
    "DEFAULT_COEFFICIENTS",
    "DEFAULT_2D_TERMS",
]

# Simulation default: y = -x - 10 x^2 + 2 x^3 + 5 x^5 (a fifth-degree
# polynomial with no constant and no fourth-degree term).
DEFAULT_COEFFICIENTS = (0.0, -1.0, -10.0, 2.0, 0.0, 5.0)

# Bivariate simulation default: {(r, s): coefficient} monomial terms of a
# smooth surface of total degree 4.
DEFAULT_2D_TERMS = {
    (1, 0): 1.5,
    (0, 1): -2.2,
    (2, 0): 0.8,
    (1, 1): 1.1,
    (0, 3): -0.6,
    (2, 2): 0.4,
}


@dataclass(frozen=True, eq=False)
class DataSample:
    """Points, centered responses, and the record of how they got that way.

    axis_transforms holds one (offset, scale) pair per axis such that the
    stored coordinate is (raw - offset) / scale; None means the axis was
    taken as is. y_offset is the mean removed from y (0.0 when centering
    was disabled).
    """

    points: np.ndarray
    y: np.ndarray
    provenance: dict
    axis_transforms: tuple = ()
    y_offset: float = 0.0

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] not in (1, 2):
            raise ValueError("points must be an (N, d) array with d in {1, 2}")
        if self.y.shape != (self.points.shape[0],):
            raise ValueError("y length must match the number of points")
        if self.n_data < 2:
            raise ValueError("need at least two data points")

    @property
    def n_data(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def is_centered(self) -> bool:
        rms = float(np.sqrt(np.mean(self.y**2)))
        return rms == 0.0 or abs(float(np.mean(self.y))) < 1e-9 * rms


def _parse_row(cells: list[str], line_no: int, n_cols: int) -> list[float]:
    if len(cells) != n_cols:
        raise ValueError(
            f"line {line_no}: expected {n_cols} comma-separated values, got {len(cells)}"
        )
    out = []
    for cell in cells:
        try:
            v = float(cell)
        except ValueError:
            raise ValueError(f"line {line_no}: {cell!r} is not a number") from None
        if not np.isfinite(v):
            raise ValueError(f"line {line_no}: non-finite value {cell!r}")
        out.append(v)
    return out


def _resolve_scaling(raw_axis: np.ndarray, mode, axis_index: int) -> tuple[float, float]:
    """Pick the (offset, scale) pair mapping this axis toward [-1, 1]."""
    if mode == "auto":
        lo, hi = float(raw_axis.min()), float(raw_axis.max())
        if hi == lo:
            raise ValueError(
                f"axis {axis_index}: cannot auto-scale a constant column "
                f"(all values equal {lo})"
            )
        return 0.5 * (lo + hi), 0.5 * (hi - lo)
    offset, scale = mode[axis_index]
    if scale == 0:
        raise ValueError(f"axis {axis_index}: scale factor must be nonzero")
    return float(offset), float(scale)


def ingest_csv(path, schema: str, *, center: bool = True, scale="none") -> DataSample:
    """Load a comma-separated sample file.

    Schema "1d" expects columns x,y; "2d" expects x1,x2,y. A single header
    row is detected automatically. Scaling is "none", "auto" (map the
    observed range of each coordinate axis onto exactly [-1, 1]), or a
    sequence of per-axis (offset, scale) pairs applying
    x -> (x - offset) / scale.

    Raises:
        ValueError: empty file, malformed or non-finite rows (with the line
            number), or degenerate scaling.
    """
    if schema not in ("1d", "2d"):
        raise ValueError(f"schema must be '1d' or '2d', got {schema!r}")
    n_cols = 2 if schema == "1d" else 3
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = []
    start = 0
    for i, line in enumerate(lines):
        if line.strip():
            cells = [c.strip() for c in line.split(",")]
            try:
                [float(c) for c in cells]
            except ValueError:
                start = i + 1  # header row
            break
    for i in range(start, len(lines)):
        line = lines[i].strip()
        if not line:
            continue
        rows.append(_parse_row([c.strip() for c in line.split(",")], i + 1, n_cols))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    raw_points = data[:, :-1]
    y = data[:, -1].copy()

    transforms = []
    points = raw_points.copy()
    if scale == "none":
        transforms = [None] * points.shape[1]
    else:
        for j in range(points.shape[1]):
            offset, factor = _resolve_scaling(raw_points[:, j], scale, j)
            points[:, j] = (raw_points[:, j] - offset) / factor
            transforms.append((offset, factor))

    y_offset = 0.0
    if center:
        y_offset = float(np.mean(y))
        y = y - y_offset

    return DataSample(
        points=points,
        y=y,
        provenance={"source": str(path), "schema": schema, "centered": center},
        axis_transforms=tuple(transforms),
        y_offset=y_offset,
    )


def simulate(
    seed: int,
    n: int = 50,
    sigma: float = 0.4,
    coefficients: Sequence[float] = DEFAULT_COEFFICIENTS,
) -> DataSample:
    """Draw a seeded 1-D polynomial sample with Gaussian noise.

    x is sampled uniformly in [-1, 1]; y is the polynomial plus zero-mean
    noise of standard deviation sigma, with the arithmetic mean removed
    afterwards. The same seed always yields bitwise-identical samples.
    """
    if n < 2:
        raise ValueError("need at least two points")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=n)
    y = np.polynomial.polynomial.polyval(x, np.asarray(coefficients, dtype=float))
    if sigma > 0:
        y = y + sigma * rng.standard_normal(n)
    y_offset = float(np.mean(y))
    return DataSample(
        points=x.reshape(-1, 1),
        y=y - y_offset,
        provenance={
            "source": "simulation",
            "seed": int(seed),
            "n": int(n),
            "sigma": float(sigma),
            "coefficients": tuple(float(c) for c in coefficients),
        },
        axis_transforms=(None,),
        y_offset=y_offset,
    )


def simulate_2d(
    seed: int,
    n: int = 100,
    sigma: float = 0.05,
    terms: dict = None,
) -> DataSample:
    """Seeded bivariate sample: polynomial surface plus Gaussian noise.

    Points are uniform in [-1, 1]^2; terms maps (r, s) monomial exponents to
    coefficients (DEFAULT_2D_TERMS when omitted). The mean is removed.
    """
    if n < 2:
        raise ValueError("need at least two points")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if terms is None:
        terms = DEFAULT_2D_TERMS
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(n, 2))
    y = np.zeros(n)
    for (r, s), coeff in terms.items():
        y += coeff * pts[:, 0] ** r * pts[:, 1] ** s
    if sigma > 0:
        y = y + sigma * rng.standard_normal(n)
    y_offset = float(np.mean(y))
    return DataSample(
        points=pts,
        y=y - y_offset,
        provenance={
            "source": "simulation-2d",
            "seed": int(seed),
            "n": int(n),
            "sigma": float(sigma),
            "terms": {f"{r},{s}": float(cf) for (r, s), cf in terms.items()},
        },
        axis_transforms=(None, None),
        y_offset=y_offset,
    )


def write_sample(sample: DataSample, path) -> None:
    """Write a sample as CSV with round-trip-exact float formatting."""
    header = "x,y" if sample.dimension == 1 else "x1,x2,y"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(sample.n_data):
            coords = [repr(float(v)) for v in sample.points[i]]
            fh.write(",".join(coords + [repr(float(sample.y[i]))]) + "\n")
