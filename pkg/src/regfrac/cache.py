"""On-disk cache for assembled operator tables.

File layout: one UTF-8 header line of space-separated key=value fields,
then (M+1)^2 little-endian float64 entries in row-major order.
"""

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

MAGIC = "regfrac-operator-v1"


def _header(grid, order, quad, symmetrize):
    fields = [
        MAGIC,
        f"dim={order.dim}",
        f"s={order.s!r}",
        f"nodes={grid.node_count}",
        f"grid={grid.key()}",
        f"quad={quad.digest()}",
        f"sym={int(bool(symmetrize))}",
    ]
    return " ".join(fields)


def cache_path(cache_dir, grid, order, quad, symmetrize):
    name = f"op_N{order.dim}_s{order.s!r}_M{grid.m}_{grid.key()}_{quad.digest()}_{int(bool(symmetrize))}.bin"
    return Path(cache_dir) / name


def store(cache_dir, op, quad):
    path = cache_path(cache_dir, op.grid, op.order, quad, op.quadrature_meta.get("symmetrized", True))
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _header(op.grid, op.order, quad, op.quadrature_meta.get("symmetrized", True))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header.encode() + b"\n")
            fh.write(np.ascontiguousarray(op.entries, dtype="<f8").tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def lookup(cache_dir, grid, order, quad, symmetrize):
    """Cached operator, or None if missing.  Mismatched headers raise."""
    from .assembly import OperatorMatrix

    path = cache_path(cache_dir, grid, order, quad, symmetrize)
    if not path.exists():
        return None
    raw = path.read_bytes()
    head, sep, body = raw.partition(b"\n")
    if not sep or head.decode(errors="replace") != _header(grid, order, quad, symmetrize):
        raise ConfigurationError(f"cache file {path} does not match the requested operator")
    n = grid.node_count
    if len(body) != 8 * n * n:
        raise ConfigurationError(f"cache file {path} is truncated")
    table = np.frombuffer(body, dtype="<f8").reshape(n, n).astype(float)
    meta = {"nodes": quad.nodes, "levels": quad.levels,
            "angular_nodes": quad.angular_nodes,
            "angular_panel_length": quad.angular_panel_length,
            "symmetrized": bool(symmetrize), "digest": quad.digest(), "cached": True}
    return OperatorMatrix(grid, order, table, meta)
