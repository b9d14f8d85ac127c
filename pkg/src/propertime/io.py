"""Bit-stable CSV/JSON emission and state/grid files.

Floats are written with 17 significant digits and keys in a fixed order, so
two runs with the same inputs produce byte-identical files.  All lengths and
times are in units of ``1/m``; the mass scale goes into every header.
"""
import json
import math
import os
from pathlib import Path

import numpy as np

from .kinematics import build_grid, grid_from_spec, inner_product
from .povm import DensityProfile, trapezoid_weights
from .states import SampledState

STATE_FORMAT = "propertime-state/1"
GRID_FORMAT = "propertime-grid/1"
NORM_TOL = 1e-6


class ArtifactIOError(OSError):
    """I/O or format failure; the message always names the path."""


def fmt(x):
    """17-significant-digit text for a float, plain text for ints."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return f"{x:.17g}"


def dumps(obj, indent=0):
    """JSON text with :func:`fmt` floats.  Dict order is preserved as given."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return fmt(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag], indent)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_text(path, text):
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise ArtifactIOError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ArtifactIOError(f"cannot read {path}: {exc.strerror or exc}") from exc


def write_json(obj, path):
    return _write_text(path, dumps(obj) + "\n")


def read_json(path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ArtifactIOError(f"malformed JSON in {path}: {exc}") from exc


def write_rows_csv(rows, columns, path, comments=()):
    lines = [f"# {c}" for c in comments] + [",".join(columns)]
    lines += [",".join(fmt(r[c]) if not isinstance(r[c], str) else r[c] for c in columns) for r in rows]
    return _write_text(path, "\n".join(lines) + "\n")


# -- density profiles -------------------------------------------------------------

def profile_header(profile):
    """Ordered header: axis, units, tau, l_max|Lambda_max, m_z_window, total_mass, mass."""
    tr = profile.truncation
    key = "l_max" if "l_max" in tr else "Lambda_max"
    win = tr.get("m_z_window", [0, 0])
    return {
        "axis": profile.axis,
        "units": "1/m",
        "tau": float(profile.tau),
        key: tr[key],
        "m_z_window": f"{int(win[0])}:{int(win[1])}",
        "total_mass": profile.total_mass,
        "mass": float(profile.m),
    }


def profile_to_dict(profile):
    d = profile_header(profile)
    d["grid"] = profile.truncation.get("grid", {})
    d["warnings"] = list(profile.warnings)
    d["points"] = [float(v) for v in profile.points]
    d["density"] = [float(v) for v in profile.density]
    return d


def write_profile_csv(profile, path):
    head = profile_header(profile)
    comments = [", ".join(head), ", ".join(v if isinstance(v, str) else fmt(v) for v in head.values()),
                "grid " + json.dumps(profile.truncation.get("grid", {}), sort_keys=True)]
    comments += [f"warning {w}" for w in profile.warnings]
    rows = [{profile.axis: p, "density": d} for p, d in zip(profile.points, profile.density)]
    return write_rows_csv(rows, [profile.axis, "density"], path, comments)


def write_profile_json(profile, path):
    return write_json(profile_to_dict(profile), path)


def _profile_from_parts(head, pts, dens, grid):
    key = "l_max" if "l_max" in head else "Lambda_max"
    lo, hi = (int(v) for v in str(head["m_z_window"]).split(":"))
    trunc = {key: head[key], "m_z_window": [lo, hi], "grid": grid}
    pts = np.asarray(pts, dtype=float)
    return DensityProfile(head["axis"], pts, np.asarray(dens, dtype=float), trapezoid_weights(pts),
                          float(head["tau"]), trunc, float(head["mass"]))


def read_profile_csv(path):
    lines = _read_text(path).splitlines()
    try:
        keys = [k.strip() for k in lines[0][1:].split(",")]
        vals = [v.strip() for v in lines[1][1:].split(",")]
        head = {k: (v if k in ("axis", "units", "m_z_window") else float(v)) for k, v in zip(keys, vals)}
        grid = json.loads(lines[2][len("# grid "):])
        body = [ln for ln in lines[3:] if not ln.startswith("#")][1:]
        data = np.array([[float(x) for x in ln.split(",")] for ln in body])
    except (IndexError, ValueError, json.JSONDecodeError) as exc:
        raise ArtifactIOError(f"malformed profile CSV {path}: {exc}") from exc
    return _profile_from_parts(head, data[:, 0], data[:, 1], grid)


def read_profile_json(path):
    d = read_json(path)
    try:
        return _profile_from_parts(d, d["points"], d["density"], d.get("grid", {}))
    except (KeyError, ValueError) as exc:
        raise ArtifactIOError(f"malformed profile JSON {path}: {exc}") from exc


def emit(obj, fmt_name, path):
    """Write a profile, spectrum or report (anything with ``to_dict``) as ``csv`` or ``json``."""
    if fmt_name not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt_name!r}")
    if isinstance(obj, DensityProfile):
        return write_profile_csv(obj, path) if fmt_name == "csv" else write_profile_json(obj, path)
    if hasattr(obj, "rows") and hasattr(obj, "phi"):  # extension spectrum
        rows = [{"n": n, "z": z} for n, z in obj.rows()]
        if fmt_name == "csv":
            return write_rows_csv(rows, ["n", "z"], path,
                                  ["phi, units, mass", f"{fmt(obj.phi)}, 1/m, {fmt(obj.m)}"])
        return write_json({"phi": obj.phi, "units": "1/m", "mass": obj.m, "rows": rows}, path)
    d = obj.to_dict() if hasattr(obj, "to_dict") else obj
    if fmt_name == "json":
        return write_json(d, path)
    rows = d.get("rows") if isinstance(d, dict) else None
    if not rows:
        raise ValueError("CSV output needs tabular rows")
    return write_rows_csv(rows, list(rows[0].keys()), path)


# -- grids and states --------------------------------------------------------------

def save_grid(grid, path):
    return write_json({"format": GRID_FORMAT, **grid.metadata()}, path)


def load_grid(path):
    d = read_json(path)
    if d.get("format") != GRID_FORMAT:
        raise ArtifactIOError(f"{path} is not a grid file")
    try:
        return grid_from_spec(d)
    except (KeyError, ValueError, TypeError) as exc:
        raise ArtifactIOError(f"invalid grid spec in {path}: {exc}") from exc


def save_state(state, grid, path):
    """Chart, grid spec and per-node ``(re, im)`` pairs for each sign component (row-major)."""
    vals = state.values(grid)
    comps = {}
    for name, idx in (("plus", 0), ("minus", 1)):
        if idx in state.signs_present():
            flat = vals[idx].ravel()
            comps[name] = [[float(v.real), float(v.imag)] for v in flat]
        else:
            comps[name] = None
    doc = {"format": STATE_FORMAT, "label": state.label, "chart": grid.chart,
           "grid": grid.metadata(), "components": comps}
    return write_json(doc, path)


def load_state(path, tol=NORM_TOL):
    """Read a state file and check it is normalized on its own grid within ``tol``."""
    d = read_json(path)
    if d.get("format") != STATE_FORMAT:
        raise ArtifactIOError(f"{path} is not a state file")
    try:
        grid = grid_from_spec(d["grid"])
        if grid.chart != d["chart"]:
            raise ValueError(f"chart {d['chart']!r} disagrees with grid chart {grid.chart!r}")
        samples = np.zeros((2,) + grid.shape, dtype=complex)
        present = {}
        for name, idx in (("plus", 0), ("minus", 1)):
            comp = d["components"][name]
            if comp is not None:
                arr = np.asarray(comp, dtype=float)
                if arr.shape != (int(np.prod(grid.shape)), 2):
                    raise ValueError(f"{name} component has {arr.shape[0]} nodes, grid has {np.prod(grid.shape)}")
                samples[idx] = (arr[:, 0] + 1j * arr[:, 1]).reshape(grid.shape)
                present[name] = True
    except (KeyError, ValueError, TypeError) as exc:
        raise ArtifactIOError(f"invalid state file {path}: {exc}") from exc
    marker = lambda *a: None  # components flagged present; values come from samples
    state = SampledState(plus=marker if "plus" in present else None,
                         minus=marker if "minus" in present else None,
                         m=grid.m, normalized=True, label=d.get("label", os.fspath(path)),
                         samples=samples, grid_spec=grid.spec)
    nsq = inner_product(state, state, grid).real
    if abs(nsq - 1.0) > tol:
        raise ArtifactIOError(f"state in {path} is not normalized: norm^2 = {nsq:.12g}")
    return state, grid
