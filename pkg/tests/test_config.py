import pytest
from hypothesis import given, strategies as st

from hybridfx.config import RunConfig, load_config, parse_config
from hybridfx.errors import ConfigError


def test_defaults_round_trip():
    cfg = RunConfig()
    assert parse_config(cfg.to_text()) == cfg


def test_weights_normalized():
    cfg = parse_config("evaluate.subjective_weights = 3, 4, 6, 4, 3\nga.eta1 = 3\nga.eta2 = 7\n")
    assert sum(cfg.evaluate.subjective_weights) == pytest.approx(1.0, abs=1e-15)
    assert cfg.evaluate.subjective_weights[0] == pytest.approx(0.15)
    assert (cfg.ga.eta1, cfg.ga.eta2) == pytest.approx((0.3, 0.7))


def test_default_parameter_couples():
    s = RunConfig().svm
    assert s.method1_params == (0.0064, 591.9507)
    assert s.method3_params == (0.1245, 639.559)
    assert s.method4_params == (0.0241, 687.4275)


@pytest.mark.parametrize("text", [
    "markov.state_count = 1",
    "combine.identification_coefficient = 1.0",
    "svm.kernel_kind = laplace",
    "evaluate.subjective_weights = 1, 2, 3",
    "wavelet.extension = zero",
    "ga.population = 1",
    "nonsense line",
    "markov.state_count = five",
])
def test_invalid_values(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_unknown_key_strictness():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("svm.bogus = 1")
    assert parse_config("svm.bogus = 1", strict=False) == RunConfig()


def test_comments_and_load(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# header\nmarkov.state_count = 4  # trailing\n\nsvm.tune = yes\n")
    cfg = load_config(p)
    assert cfg.markov.state_count == 4 and cfg.svm.tune is True
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


@given(st.integers(2, 9), st.floats(0.01, 0.99), st.integers(2, 50))
def test_round_trip_property(k, rho, pop):
    text = (f"markov.state_count = {k}\ncombine.identification_coefficient = {rho!r}\n"
            f"ga.population = {pop}\n")
    cfg = parse_config(text)
    assert parse_config(cfg.to_text()) == cfg
