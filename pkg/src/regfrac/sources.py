"""Closed-form radial data descriptors and CSV profile ingestion.

Vocabulary:

    constant:c            u(r) = c
    two-minus-r-squared   u(r) = 2 - r²
    gaussian:a,b          u(r) = a exp(-b r²)
    <path>.csv            columns r,<value>; linearly interpolated onto the grid
"""

import csv
import math
from pathlib import Path

import numpy as np

from .assembly import RadialProfile
from .errors import ConfigurationError


def _floats(text, count, name):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigurationError(f"bad parameters for {name}: {text!r}") from None
    if len(vals) != count or not all(math.isfinite(v) for v in vals):
        raise ConfigurationError(f"{name} takes {count} finite parameter(s), got {text!r}")
    return vals


def parse_source(desc):
    """Turn a descriptor string into a vectorized function of r."""
    if callable(desc):
        return desc
    if not isinstance(desc, str):
        raise ConfigurationError(f"unsupported source descriptor {desc!r}")
    text = desc.strip()
    head, _, params = text.partition(":")
    if head == "constant":
        (c,) = _floats(params, 1, "constant")
        return lambda r: np.full(np.shape(r), c, dtype=float)
    if text == "two-minus-r-squared":
        return lambda r: 2.0 - np.asarray(r, dtype=float) ** 2
    if head == "gaussian":
        a, b = _floats(params, 2, "gaussian")
        return lambda r: a * np.exp(-b * np.asarray(r, dtype=float) ** 2)
    if text.lower().endswith(".csv"):
        return _csv_profile(Path(text))
    raise ConfigurationError(f"unknown source descriptor {desc!r}")


def _csv_profile(path):
    if not path.exists():
        raise ConfigurationError(f"source file {path} not found")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise ConfigurationError(f"{path}: need a header and at least two rows")
    try:
        data = np.array([[float(x) for x in row[:2]] for row in rows[1:] if row], dtype=float)
    except ValueError:
        raise ConfigurationError(f"{path}: non-numeric entry") from None
    r, v = data[:, 0], data[:, 1]
    if np.any(np.diff(r) <= 0) or r[0] > 0.0 or r[-1] < 1.0:
        raise ConfigurationError(f"{path}: radii must increase and cover [0, 1]")
    if not np.all(np.isfinite(v)):
        raise ConfigurationError(f"{path}: non-finite values")
    return lambda x: np.interp(x, r, v)


def sample(desc, grid):
    """RadialProfile of ``desc`` on ``grid``; profiles pass through unchanged."""
    if isinstance(desc, RadialProfile):
        if desc.grid != grid:
            raise ConfigurationError("profile lives on a different grid")
        return desc
    fn = parse_source(desc)
    vals = np.asarray(fn(grid.nodes), dtype=float) * np.ones(grid.node_count)
    if not np.all(np.isfinite(vals)):
        raise ConfigurationError("source has non-finite values on the grid")
    return RadialProfile(grid, vals)
