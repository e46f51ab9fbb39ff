import pytest

from disco.config import ConfigError, PAPER_SCALE, RunConfig, load_config
from disco.data import make_taxonomy


def test_text_roundtrip():
    cfg = RunConfig(d=64, disable_cl=True, taxonomy_sizes=(2, 5), learning_rate=2e-4, d_z=5)
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_comments_and_base(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# desk run\nepochs = 7  # short\n\nedge_rule = all\n")
    cfg = load_config(p, RunConfig(d=256))
    assert cfg.epochs == 7 and cfg.edge_rule == "all" and cfg.d == 256


@pytest.mark.parametrize("text, field", [
    ("learning_rate = 0", "learning_rate"),
    ("tau = -1", "tau"),
    ("epsilon = -0.5", "epsilon"),
    ("cl_weight = -1", "cl_weight"),
    ("batch_size = 0", "batch_size"),
    ("patience = 0", "patience"),
    ("base_model = gcn", "base_model"),
    ("output_activation = relu", "output_activation"),
    ("taxonomy_sizes = 4,2", "taxonomy_sizes"),
    ("density = 1.5", "density"),
    ("d = x", "d"),
    ("disable_sa = maybe", "disable_sa"),
    ("colour = red", "colour"),
    ("n_layers = 0", "n_layers"),
])
def test_validation_names_field(text, field):
    with pytest.raises(ConfigError) as info:
        RunConfig.from_text(text)
    assert info.value.field == field and field in str(info.value)


def test_missing_equals_sign():
    with pytest.raises(ConfigError, match="line 1"):
        RunConfig.from_text("epochs 3")


def test_dz_checked_against_taxonomy():
    RunConfig(d_z=30).check_taxonomy(make_taxonomy((3, 9, 30)))
    with pytest.raises(ConfigError, match="d_z"):
        RunConfig(d_z=10).check_taxonomy(make_taxonomy((3, 9, 30)))


def test_estimator_params_and_paper_scale():
    params = RunConfig(seed=4).replace(**PAPER_SCALE).estimator_params()
    assert params["d"] == params["d_h"] == 256 and params["random_state"] == 4
    assert "density" not in params and "seed" not in params
