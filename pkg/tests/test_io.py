import json
import os

import numpy as np
import pytest

from propertime import io, povm, states
from propertime.kinematics import build_grid, inner_product
from propertime.operators import extension_spectrum


@pytest.fixture(scope="module")
def profile():
    s = states.gaussian_packet((0.0, 0.0, 0.5), 0.5)
    return povm.position_density(s, 0.5, np.linspace(-8, 8, 81))


def test_fmt_round_trips_floats():
    for x in (0.1, 1 / 3, -2.5e-300, 1e300, 123456789.125):
        assert float(io.fmt(x)) == x
    assert io.fmt(float("nan")) == "NaN" and io.fmt(-np.inf) == "-Infinity"
    assert io.fmt(np.int64(3)) == "3" and io.fmt(True) == "true"


def test_dumps_is_valid_json_and_ordered():
    doc = {"b": 1.5, "a": [1, 2.25, None], "c": {"z": np.arange(2), "y": 1 + 2j}}
    text = io.dumps(doc)
    back = json.loads(text)
    assert list(back) == ["b", "a", "c"] and back["c"]["y"] == [1, 2]
    with pytest.raises(TypeError):
        io.dumps(object())


def test_profile_csv_header_and_roundtrip(profile, tmp_path):
    path = io.write_profile_csv(profile, tmp_path / "p.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "# axis, units, tau, Lambda_max, m_z_window, total_mass, mass"
    assert lines[1].startswith("# z, 1/m, 0.5, 8, 0:0, ")
    back = io.read_profile_csv(path)
    assert np.array_equal(back.density, profile.density) and np.array_equal(back.points, profile.points)
    assert back.total_mass == profile.total_mass


def test_profile_json_roundtrip_and_byte_stability(profile, tmp_path):
    a = io.write_profile_json(profile, tmp_path / "a.json")
    b = io.write_profile_json(profile, tmp_path / "b.json")
    assert a.read_bytes() == b.read_bytes()
    back = io.read_profile_json(a)
    assert np.array_equal(back.density, profile.density)
    assert back.truncation["m_z_window"] == [0, 0]


def test_malformed_files(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("garbage\n")
    with pytest.raises(io.ArtifactIOError):
        io.read_profile_csv(bad)
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(io.ArtifactIOError):
        io.read_json(tmp_path / "bad.json")
    with pytest.raises(io.ArtifactIOError):
        io.read_json(tmp_path / "missing.json")


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_directory(tmp_path, profile):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    try:
        with pytest.raises(io.ArtifactIOError):
            io.write_profile_csv(profile, ro / "p.csv")
    finally:
        ro.chmod(0o700)


def test_write_into_a_file_path_fails(tmp_path, profile):
    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    with pytest.raises(io.ArtifactIOError) as exc:
        io.write_profile_csv(profile, blocker / "p.csv")
    assert "blocker" in str(exc.value)


def test_emit_spectrum(tmp_path):
    spec = extension_spectrum(np.pi, 0, 3)
    text = io.emit(spec, "csv", tmp_path / "s.csv").read_text()
    assert text.splitlines()[2:] == ["n,z", "0,1", "1,3", "2,5"]
    d = io.read_json(io.emit(spec, "json", tmp_path / "s.json"))
    assert [r["z"] for r in d["rows"]] == [1, 3, 5]
    with pytest.raises(ValueError):
        io.emit(spec, "xml", tmp_path / "s.xml")


def test_grid_roundtrip(tmp_path):
    g = build_grid("spherical", (16, 8, 8), {"r_min": 1e-2, "r_max": 5.0}, radial_map="log")
    back = io.load_grid(io.save_grid(g, tmp_path / "g.json"))
    assert back.same_as(g) and np.array_equal(back.weights, g.weights)


def test_state_roundtrip(tmp_path):
    g = build_grid("hyperbolic", (48, 96, 16), {"omega_max": 5.0})
    s = states.normalize(states.gaussian_packet((0.2, 0.1, 0.3), 0.5, "-"), g)
    loaded, lg = io.load_state(io.save_state(s, g, tmp_path / "s.json"))
    assert lg.same_as(g)
    assert np.array_equal(loaded.values(lg), s.values(g))
    assert inner_product(loaded, s, g).real == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        loaded.values(build_grid("hyperbolic", (8, 8, 8)))


def test_state_file_validation(tmp_path):
    g = build_grid("hyperbolic", (24, 48, 8), {"omega_max": 5.0})
    s = states.gaussian_packet((0.0, 0.0, 0.3), 0.5)
    path = io.save_state(s.scaled(2.0), g, tmp_path / "s.json")
    with pytest.raises(io.ArtifactIOError, match="not normalized"):
        io.load_state(path)
    doc = json.loads(io.save_state(s, g, tmp_path / "t.json").read_text())
    doc["components"]["plus"] = doc["components"]["plus"][:-1]
    (tmp_path / "t.json").write_text(json.dumps(doc))
    with pytest.raises(io.ArtifactIOError, match="nodes"):
        io.load_state(tmp_path / "t.json")
    with pytest.raises(io.ArtifactIOError):
        io.load_state(io.save_grid(g, tmp_path / "g.json"))
