"""YAML run configuration validated against the shipped JSON schema.

A user file is merged over ``data/default.yaml`` (mappings merge key by key,
everything else replaces).  The ``state`` block is replaced as a whole, so a
user ``state.file`` does not collide with the default constructor.
Environment variables are never consulted.
"""
import copy
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .kinematics import build_grid


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending key."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _data_text(name):
    return resources.files("propertime").joinpath("data", name).read_text(encoding="utf-8")


def schema():
    return json.loads(_data_text("config.schema.json"))


def default_document():
    return yaml.safe_load(_data_text("default.yaml"))


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k != "state" and isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


_PI = re.compile(r"^(-)?(?:([0-9.]+)\*?)?pi(?:/([0-9.]+))?$")


def parse_angle(value):
    """Numbers pass through; strings like ``pi``, ``-pi/2``, ``0.5*pi`` are evaluated."""
    if isinstance(value, (int, float)):
        return float(value)
    mt = _PI.match(str(value).replace(" ", ""))
    if not mt:
        raise ConfigError(f"cannot parse angle {value!r}", "spectrum.phi")
    sign = -1.0 if mt.group(1) else 1.0
    num = float(mt.group(2)) if mt.group(2) else 1.0
    den = float(mt.group(3)) if mt.group(3) else 1.0
    return sign * num * np.pi / den


def axis_samples(block, name):
    lo, hi = block["range"]
    step = block["step"]
    if not hi > lo:
        raise ConfigError("range must be increasing", f"axes.{name}.range")
    n = int(round((hi - lo) / step))
    if not np.isclose(lo + n * step, hi, rtol=0, atol=1e-9 * max(1.0, abs(hi))):
        raise ConfigError("range is not a whole number of steps", f"axes.{name}.step")
    return lo + step * np.arange(n + 1)


@dataclass(frozen=True)
class RunConfig:
    document: dict
    base_dir: Path

    @property
    def m(self):
        return float(self.document["mass"])

    @property
    def workers(self):
        return int(self.document.get("workers", 1))

    @property
    def output_dir(self):
        d = Path(self.document["output"]["directory"])
        return d if d.is_absolute() else self.base_dir / d

    @property
    def output_format(self):
        return self.document["output"]["format"]

    @property
    def truncations(self):
        t = self.document["truncations"]
        return {"l_max": int(t["l_max"]), "Lambda_max": float(t["Lambda_max"]),
                "n_lambda": int(t["n_lambda"]), "m_z_window": tuple(t["m_z_window"])}

    @property
    def taus(self):
        return [float(t) for t in self.document["taus"]]

    def axis(self, name):
        return axis_samples(self.document["axes"][name], name)

    def grid(self, name):
        g = self.document["grids"][name]
        chart = "spherical" if name == "spherical" else "hyperbolic"
        return build_grid(chart, g["sizes"], g.get("bounds"), m=self.m,
                          radial_map=g.get("radial_map", "linear"))

    @property
    def phi(self):
        return parse_angle(self.document["spectrum"]["phi"])

    def section(self, name):
        return self.document.get(name, {})

    def build_state(self):
        """Construct the configured state; file states also return their grid."""
        from . import states

        src = self.document["state"]
        if "file" in src:
            from .io import load_state

            path = Path(src["file"])
            return load_state(path if path.is_absolute() else self.base_dir / path)
        c = src["constructor"]
        sign, m = c.get("sign", "+"), self.m
        kind = c["kind"]
        if kind == "gaussian":
            return states.gaussian_packet(c.get("center", [0.0, 0.0, 0.0]), c.get("width", 0.5), sign, m), None
        if kind == "shell":
            return states.shell_packet(c.get("radius", 2.0), c.get("width", 0.5), sign, m), None
        tr = c.get("transverse", {})
        transverse = states.TransverseProfile.gaussian(tr.get("center", 1.0), tr.get("width", 0.4))
        tau = c.get("tau", 0.0)
        if kind == "position_element":
            return states.position_element_state(c.get("z0", 0.0), transverse, sign, tau, m), None
        return states.localized_state(profile_from_spec(c, m), transverse, sign, tau, m,
                                      label=f"localized({c})"), None


def profile_from_spec(c, m=1.0):
    """``g(nu) = cos^p(nu) (1 + tilt sin nu) exp(-i m xi z0 nu)``."""
    p, tilt, z0 = float(c.get("cos_power", 2.0)), float(c.get("tilt", 0.0)), float(c.get("z0", 0.0))
    xi = 1.0 if c.get("sign", "+") == "+" else -1.0

    def g(nu):
        nu = np.asarray(nu, dtype=float)
        return np.cos(nu) ** p * (1.0 + tilt * np.sin(nu)) * np.exp(-1j * m * xi * z0 * nu)

    return g


def validate_document(doc):
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path)
        raise ConfigError(exc.message, path) from None
    src = doc.get("state", {})
    if ("file" in src) == ("constructor" in src):
        raise ConfigError("exactly one of state.file and state.constructor is required", "state")
    t = doc.get("truncations", {})
    win = t.get("m_z_window")
    if win and win[0] > win[1]:
        raise ConfigError("empty window", "truncations.m_z_window")
    n = doc.get("spectrum", {}).get("n_range")
    if n and n[1] <= n[0]:
        raise ConfigError("need n_max > n_min", "spectrum.n_range")
    return doc


def load_config(path=None, overrides=None):
    """Default document, merged with the YAML file at ``path`` and then ``overrides``."""
    doc = default_document()
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror or exc}", str(path)) from None
        try:
            user = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed YAML: {exc}", str(path)) from None
        if not isinstance(user, dict):
            raise ConfigError("top level must be a mapping", str(path))
        doc = _merge(doc, user)
        base = path.resolve().parent
    if overrides:
        doc = _merge(doc, overrides)
    validate_document(doc)
    src = doc["state"]
    if "file" in src:
        f = Path(src["file"])
        if not (f if f.is_absolute() else base / f).exists():
            raise ConfigError(f"state file {src['file']!r} does not exist", "state.file")
    if "spectrum" in doc and "phi" in doc["spectrum"]:
        phi = parse_angle(doc["spectrum"]["phi"])
        if not -np.pi < phi <= np.pi + 1e-15:
            raise ConfigError("phi must lie in (-pi, pi]", "spectrum.phi")
    return RunConfig(doc, base)
