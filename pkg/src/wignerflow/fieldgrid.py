"""Uniform phase-space grids of flow quantities, zero-contour extraction,
and CSV/JSON serialization.

Grids are row-major with x fastest: file rows loop k in the outer loop and x
in the inner one, so byte-identical output is reproducible across runs and
thread counts.  Floats are written with 17 significant digits, enough to
round-trip doubles exactly.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import gaussian, thermo
from .classical import Trajectory
from .errors import UsageError
from .gaussian import GaussianEnsembleParams, StagnationPoint
from .thermo import ThermalEnsembleParams

__all__ = [
    "GridSpec",
    "FieldGrid",
    "QUANTITIES",
    "sample_field",
    "zero_contours",
    "export_table",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling window: inclusive ranges and node counts."""

    x_lo: float
    x_hi: float
    k_lo: float
    k_hi: float
    nx: int
    nk: int

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.k_lo < self.k_hi):
            raise UsageError("grid ranges must satisfy lo < hi")
        if self.nx < 2 or self.nk < 2:
            raise UsageError("grids need at least 2 nodes per axis")

    def x_nodes(self):
        return np.linspace(self.x_lo, self.x_hi, self.nx)

    def k_nodes(self):
        return np.linspace(self.k_lo, self.k_hi, self.nk)


@dataclass
class FieldGrid:
    """Sampled values on a GridSpec; vector quantities have a trailing axis
    of size 2.  ``valid`` (when present) flags nodes inside the velocity
    trust region; flagged-out nodes hold zeros, never silent garbage."""

    spec: GridSpec
    quantity: str
    values: np.ndarray
    valid: np.ndarray | None = None

    @property
    def is_vector(self):
        return self.values.ndim == 3


# quantity -> (needs trust mask, vector) per ensemble family
_GAUSSIAN_QUANTITIES = {
    "g": (False, False),
    "jx": (False, False),
    "jk": (False, False),
    "j": (False, True),
    "divj": (False, False),
    "wx": (True, False),
    "wk": (True, False),
    "w": (True, True),
    "divw": (True, False),
    "vort": (True, False),
}
_THERMAL_QUANTITIES = {
    "w0": (False, False),
    "w_st2": (False, False),
    "jx": (False, False),
    "jk": (False, False),
    "j": (False, True),
    "divw": (False, False),
}

QUANTITIES = {
    "gaussian": tuple(sorted(_GAUSSIAN_QUANTITIES)),
    "thermal": tuple(sorted(_THERMAL_QUANTITIES)),
}


def _gaussian_row(params, quantity, x, k):
    if quantity == "g":
        return gaussian.gaussian_w_xy(params, x, k)
    if quantity == "jx":
        return gaussian.currents_closed_xy(params, x, k)[0]
    if quantity == "jk":
        return gaussian.currents_closed_xy(params, x, k)[1]
    if quantity == "j":
        return np.stack(gaussian.currents_closed_xy(params, x, k), axis=-1)
    if quantity == "divj":
        return gaussian.stationarity_div_j_xy(params, x, k)
    if quantity == "wx":
        return gaussian.velocity_w_xy(params, x, k)[0]
    if quantity == "wk":
        return gaussian.velocity_w_xy(params, x, k)[1]
    if quantity == "w":
        return np.stack(gaussian.velocity_w_xy(params, x, k), axis=-1)
    if quantity == "divw":
        return gaussian.liouville_div_w_xy(params, x, k)
    if quantity == "vort":
        return gaussian.vorticity_xy(params, x, k)
    raise UsageError(f"unknown gaussian quantity {quantity!r}")


def _thermal_row(params, quantity, x, k):
    if quantity == "w0":
        return thermo.w0_xy(params, x, k)
    if quantity == "w_st2":
        return thermo.w_st2_xy(params, x, k)
    if quantity == "jx":
        return thermo.currents_td_xy(params, x, k)[0]
    if quantity == "jk":
        return thermo.currents_td_xy(params, x, k)[1]
    if quantity == "j":
        return np.stack(thermo.currents_td_xy(params, x, k), axis=-1)
    if quantity == "divw":
        return thermo.div_w_td_xy(params, x, k)
    raise UsageError(f"unknown thermal quantity {quantity!r}")


def sample_field(params, quantity, spec, threads=1):
    """Sample one quantity over the grid; deterministic for any thread count.

    ``params`` selects the ensemble family (GaussianEnsembleParams or
    ThermalEnsembleParams).  Velocity-family gaussian quantities are masked
    to the trust region instead of extrapolated.
    """
    if isinstance(params, GaussianEnsembleParams):
        table, row_fn = _GAUSSIAN_QUANTITIES, _gaussian_row
    elif isinstance(params, ThermalEnsembleParams):
        table, row_fn = _THERMAL_QUANTITIES, _thermal_row
    else:
        raise UsageError("params must be Gaussian or Thermal ensemble parameters")
    if quantity not in table:
        raise UsageError(
            f"quantity {quantity!r} is not defined for this ensemble; "
            f"choose from {', '.join(sorted(table))}")
    needs_mask, is_vector = table[quantity]
    xs = spec.x_nodes()
    ks = spec.k_nodes()
    shape = (spec.nk, spec.nx, 2) if is_vector else (spec.nk, spec.nx)
    values = np.zeros(shape)
    valid = None
    if needs_mask:
        valid = np.zeros((spec.nk, spec.nx), dtype=bool)

    def fill(j):
        krow = np.full_like(xs, ks[j])
        if needs_mask:
            mask = gaussian.trust_mask_xy(params, xs, krow)
            valid[j] = mask
            if not np.any(mask):
                return
            out = row_fn(params, quantity, xs[mask], krow[mask])
            values[j][mask] = out
        else:
            values[j] = row_fn(params, quantity, xs, krow)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(spec.nk)))
    else:
        for j in range(spec.nk):
            fill(j)
    return FieldGrid(spec=spec, quantity=quantity, values=values, valid=valid)


# ---------------------------------------------------------------------------
# marching squares
# ---------------------------------------------------------------------------

def _edge_point(xs, ks, values, edge):
    """Linear-interpolation crossing point on one grid edge.

    ``edge`` = (i, j, 'h'|'v'): horizontal edges join (i,j)-(i+1,j), vertical
    (i,j)-(i,j+1), in node indices (i along x, j along k).
    """
    i, j, kind = edge
    v0 = values[j, i]
    if kind == "h":
        v1 = values[j, i + 1]
        t = 0.5 if v1 == v0 else v0 / (v0 - v1)
        return (xs[i] + t * (xs[i + 1] - xs[i]), ks[j])
    v1 = values[j + 1, i]
    t = 0.5 if v1 == v0 else v0 / (v0 - v1)
    return (xs[i], ks[j] + t * (ks[j + 1] - ks[j]))


_SEGMENT_TABLE = {
    # cell corner order: (i,j) (i+1,j) (i+1,j+1) (i,j+1); edges B,R,T,L
    1: [("L", "B")], 2: [("B", "R")], 3: [("L", "R")], 4: [("R", "T")],
    6: [("B", "T")], 7: [("L", "T")], 8: [("T", "L")],
    9: [("T", "B")], 11: [("T", "R")], 12: [("R", "L")],
    13: [("R", "B")], 14: [("B", "L")],
}


def zero_contours(grid):
    """Marching-squares polylines of the zero level of a scalar grid.

    Nodes with value exactly zero are classed with the positive side; the
    ambiguous saddle cells are split by the cell-center average.  Polylines
    are either closed (first point repeated) or terminate on the boundary,
    and their order is deterministic.
    """
    if grid.is_vector:
        raise UsageError("zero_contours requires a scalar grid")
    values = grid.values
    xs = grid.spec.x_nodes()
    ks = grid.spec.k_nodes()
    nk, nx = values.shape
    segments = []  # pairs of edge keys
    for j in range(nk - 1):
        for i in range(nx - 1):
            c0 = values[j, i] >= 0.0
            c1 = values[j, i + 1] >= 0.0
            c2 = values[j + 1, i + 1] >= 0.0
            c3 = values[j + 1, i] >= 0.0
            idx = (c0 * 1) | (c1 * 2) | (c2 * 4) | (c3 * 8)
            if idx in (0, 15):
                continue
            local = {"B": (i, j, "h"), "T": (i, j + 1, "h"),
                     "L": (i, j, "v"), "R": (i + 1, j, "v")}
            if idx in (5, 10):
                center = 0.25 * (values[j, i] + values[j, i + 1]
                                 + values[j + 1, i + 1] + values[j + 1, i])
                if idx == 5:
                    pairs = ([("L", "T"), ("B", "R")] if center >= 0.0
                             else [("L", "B"), ("R", "T")])
                else:
                    pairs = ([("B", "L"), ("T", "R")] if center >= 0.0
                             else [("B", "R"), ("T", "L")])
            else:
                pairs = _SEGMENT_TABLE[idx]
            for e0, e1 in pairs:
                segments.append((local[e0], local[e1]))
    # stitch segments sharing edge keys into chains
    adjacency = {}
    for seg in segments:
        a, b = seg
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)
    unused = {tuple(sorted((a, b))) for a, b in segments}

    def take(a, b):
        unused.discard(tuple(sorted((a, b))))

    def walk(start):
        chain = [start]
        current = start
        while True:
            nxt = None
            for cand in adjacency.get(current, ()):
                if tuple(sorted((current, cand))) in unused:
                    nxt = cand
                    break
            if nxt is None:
                return chain
            take(current, nxt)
            chain.append(nxt)
            current = nxt

    endpoints = sorted({k for k, nbrs in adjacency.items()
                        if len(nbrs) == 1})
    polylines = []
    for start in endpoints:
        if any(tuple(sorted((start, n))) in unused
               for n in adjacency.get(start, ())):
            chain = walk(start)
            polylines.append(chain)
    # whatever remains forms closed loops
    while unused:
        start = sorted(unused)[0][0]
        chain = walk(start)
        chain.append(chain[0])  # close the loop
        polylines.append(chain)
    out = []
    for chain in polylines:
        pts = np.array([_edge_point(xs, ks, values, e) for e in chain])
        out.append(pts)
    return out


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(v):
    return format(float(v), ".17g")


def _grid_records(grid):
    xs = grid.spec.x_nodes()
    ks = grid.spec.k_nodes()
    has_mask = grid.valid is not None
    for j in range(grid.spec.nk):
        for i in range(grid.spec.nx):
            rec = {"x": xs[i], "k": ks[j]}
            if grid.is_vector:
                rec["vx"] = grid.values[j, i, 0]
                rec["vk"] = grid.values[j, i, 1]
            else:
                rec["value"] = grid.values[j, i]
            if has_mask:
                rec["valid"] = int(grid.valid[j, i])
            yield rec


def _trajectory_records(traj):
    has_res = traj.energy_residual is not None
    for i in range(len(traj)):
        rec = {"tau": traj.tau[i], "x": traj.x[i], "k": traj.k[i],
               "y": traj.y[i], "z": traj.z[i]}
        if has_res:
            rec["energy_residual"] = traj.energy_residual[i]
        yield rec


def _stagnation_records(points):
    for s in points:
        yield {"x": s.location.x, "k": s.location.k, "residual": s.residual,
               "circulation": s.circulation, "class": s.kind}


def as_records(obj):
    """Normalize a grid / trajectory / stagnation list / record list into a
    list of flat dictionaries."""
    if isinstance(obj, FieldGrid):
        return list(_grid_records(obj))
    if isinstance(obj, Trajectory):
        return list(_trajectory_records(obj))
    if isinstance(obj, (list, tuple)):
        if all(isinstance(s, StagnationPoint) for s in obj) and obj:
            return list(_stagnation_records(obj))
        if all(isinstance(r, dict) for r in obj):
            return list(obj)
    raise UsageError(f"cannot serialize object of type {type(obj).__name__}")


def export_table(obj, fmt, path):
    """Write a grid, trajectory, or record list as CSV or JSON.

    CSV carries one header row naming the columns and 17-significant-digit
    floats (exact round-trip); JSON mirrors the same records as an array of
    objects.
    """
    records = as_records(obj)
    if fmt not in ("csv", "json"):
        raise UsageError("format must be 'csv' or 'json'")
    try:
        if fmt == "csv":
            _write_csv(records, path)
        else:
            _write_json(records, path)
    except OSError as exc:
        raise IOError(f"failed writing {path}: {exc}") from exc


def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return _fmt(v)


def _write_csv(records, path):
    if not records:
        raise UsageError("refusing to write an empty table")
    header = list(records[0].keys())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for rec in records:
            fh.write(",".join(_cell(rec[k]) for k in header) + "\n")


def _json_value(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _write_json(records, path):
    data = [{k: _json_value(v) for k, v in rec.items()} for rec in records]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")
