import math

import pytest

from fermivac.config import ConfigError, ExperimentConfig, load_config, parse_config, parse_override


def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert (cfg.N_s, cfg.L, cfg.m, cfg.q, cfg.dt) == (3, 2 * math.pi, 1.0, 1.0, 1e-3)
    assert cfg == ExperimentConfig()


def test_even_sites_rejected():
    with pytest.raises(ConfigError, match="N_s"):
        parse_config("N_s: 4")


def test_cutoff_on_mode_energy_rejected():
    with pytest.raises(ConfigError, match="E_c"):
        parse_config(f"N_s: 5\nE_c: {math.sqrt(5)!r}")


def test_cutoff_below_mass_rejected():
    with pytest.raises(ConfigError, match="E_c"):
        parse_config("E_c: 0.9")


def test_unknown_keys_listed():
    with pytest.raises(ConfigError, match="bogus, zeta"):
        parse_config("zeta: 1\nbogus: 2")


@pytest.mark.parametrize("doc,field", [
    ("m: -1", "m"),
    ("dt: 0", "dt"),
    ("t_f: 0", "t_f"),
    ("dt: 0.3", "dt"),
    ("f: []", "f"),
    ("chi_recipe: other", "chi_recipe"),
    ("k_squared: 4", "k_squared"),
    ("Lambda: [1.0]", "Lambda"),
    ("seed: -1", "seed"),
    ("N_s: 3.0", "N_s"),
    ("q: yes", "q"),
])
def test_invalid_values_name_the_field(doc, field):
    with pytest.raises(ConfigError, match=field):
        parse_config(doc)


def test_grouped_tables_are_flattened():
    cfg = parse_config("lattice:\n  N_s: 5\n  m: 2.0\nexperiment_params:\n  f: [1, 2]\n")
    assert (cfg.N_s, cfg.m, cfg.f) == (5, 2.0, [1.0, 2.0])


def test_overrides_win():
    cfg = parse_config("N_s: 5", ["N_s=1", "f=[0]", "E_c=3.5"])
    assert (cfg.N_s, cfg.f, cfg.E_c) == (1, [0.0], 3.5)


def test_scalar_list_promoted():
    assert parse_config("Lambda: 50").Lambda == [50.0]


def test_malformed_documents():
    with pytest.raises(ConfigError):
        parse_config("a: [1, 2")
    with pytest.raises(ConfigError):
        parse_config("- 1\n- 2")
    with pytest.raises(ConfigError):
        parse_override("no_equals_sign")


def test_echo_omits_output_path():
    echo = parse_config("output: somewhere").echo()
    assert "output" not in echo and echo["N_s"] == 3


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")
