import numpy as np
import pytest
import yaml

from propertime import config, io, states
from propertime.kinematics import build_grid


def _write(tmp_path, doc, name="run.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return p


def test_defaults_validate():
    cfg = config.load_config()
    assert cfg.m == 1.0 and cfg.truncations["l_max"] == 12
    assert cfg.phi == pytest.approx(np.pi)
    assert cfg.axis("z")[0] == -60.0 and cfg.axis("z")[-1] == pytest.approx(60.0)
    st, grid = cfg.build_state()
    assert grid is None and st.normalized


@pytest.mark.parametrize("text,value", [("pi", np.pi), ("-pi/2", -np.pi / 2), ("0.5*pi", np.pi / 2),
                                        (0.3, 0.3), ("2pi/3", 2 * np.pi / 3)])
def test_parse_angle(text, value):
    assert config.parse_angle(text) == pytest.approx(value)


def test_parse_angle_rejects():
    with pytest.raises(config.ConfigError):
        config.parse_angle("tau")


def test_merge_replaces_state_block(tmp_path):
    cfg = config.load_config(_write(tmp_path, {"state": {"constructor": {"kind": "shell", "radius": 1.0}},
                                               "truncations": {"l_max": 3}}))
    assert cfg.document["state"] == {"constructor": {"kind": "shell", "radius": 1.0}}
    assert cfg.truncations["l_max"] == 3 and cfg.truncations["Lambda_max"] == 8.0


@pytest.mark.parametrize("doc,key", [
    ({"mass": -1.0}, "mass"),
    ({"truncations": {"m_z_window": [2, -2]}}, "truncations.m_z_window"),
    ({"spectrum": {"n_range": [3, 1]}}, "spectrum.n_range"),
    ({"spectrum": {"phi": "-pi"}}, "spectrum.phi"),
    ({"state": {}}, "state"),
    ({"state": {"file": "nowhere.json"}}, "state.file"),
    ({"bogus": 1}, ""),
])
def test_invalid_documents(tmp_path, doc, key):
    with pytest.raises(config.ConfigError) as exc:
        config.load_config(_write(tmp_path, doc))
    assert exc.value.path == key


def test_axis_step_must_divide_range():
    with pytest.raises(config.ConfigError):
        config.axis_samples({"range": [0.0, 1.0], "step": 0.3}, "z")


def test_unreadable_and_malformed(tmp_path):
    with pytest.raises(config.ConfigError):
        config.load_config(tmp_path / "absent.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [1,\n")
    with pytest.raises(config.ConfigError):
        config.load_config(bad)
    (tmp_path / "list.yaml").write_text("- 1\n")
    with pytest.raises(config.ConfigError):
        config.load_config(tmp_path / "list.yaml")


def test_state_file_relative_to_config(tmp_path):
    g = build_grid("hyperbolic", (24, 48, 8), {"omega_max": 5.0})
    s = states.normalize(states.gaussian_packet((0.0, 0.0, 0.3), 0.5), g)
    io.save_state(s, g, tmp_path / "state.json")
    cfg = config.load_config(_write(tmp_path, {"state": {"file": "state.json"}}))
    st, grid = cfg.build_state()
    assert grid.same_as(g)


def test_localized_constructor_profile():
    g = config.profile_from_spec({"cos_power": 2, "tilt": 0.5, "z0": 1.0})
    nu = np.array([-0.3, 0.0, 0.7])
    assert np.allclose(g(nu), np.cos(nu) ** 2 * (1 + 0.5 * np.sin(nu)) * np.exp(-1j * nu))


def test_shipped_localized_example_validates():
    from importlib import resources

    path = resources.files("propertime").joinpath("data", "localized.yaml")
    cfg = config.load_config(str(path))
    st, _ = cfg.build_state()
    assert st.normalized
