import pytest

from spde2d.config import ExperimentConfig, format_spectrum, load_config, parse_config, parse_spectrum
from spde2d.errors import GridAlignmentError, InvalidConfigError
from spde2d.model import InitialSpectrum


def test_defaults_are_the_reference_setup():
    cfg = ExperimentConfig().validate()
    assert (cfg.theta0, cfg.theta1, cfg.eta1, cfg.theta2) == (0.0, 0.2, 0.2, 0.2)
    assert (cfg.alpha, cfg.mu0, cfg.epsilon) == (0.5, -19.5, 0.1)
    assert cfg.spectrum().get((1, 1)) == 3.0
    assert cfg.spatial_thinning().r == pytest.approx(1.897367, abs=1e-6)
    assert cfg.mode == (1, 1)


def test_text_round_trip(tmp_path):
    cfg = ExperimentConfig(epsilon=0.05, m1=5, n=25, mu0_known=True, x0="1,1:3.0;2,1:-0.5", seed=2 ** 63 + 5)
    assert parse_config(cfg.to_text()) == cfg
    p = tmp_path / "c.txt"
    p.write_text(cfg.to_text())
    assert load_config(p) == cfg


def test_parse_comments_and_types():
    cfg = parse_config("# header\nN = 500  # steps\nmu0_known = yes\nseed = 0x10\n\nb=0.1\n")
    assert cfg.N == 500 and cfg.mu0_known is True and cfg.seed == 16 and cfg.b == 0.1


@pytest.mark.parametrize("text", ["bogus = 1", "N = ten", "mu0_known = maybe", "just words"])
def test_parse_errors(text):
    with pytest.raises(InvalidConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(InvalidConfigError):
        load_config(tmp_path / "nope.txt")


@pytest.mark.parametrize("kw", [dict(b=0.07), dict(reps=0), dict(threads=0), dict(alpha0=3.0),
                                dict(lambda_lo=5.0, lambda_hi=1.0), dict(theta2=-1.0), dict(seed=-1),
                                dict(n=2000), dict(theta2_lo=0.0)])
def test_validate_rejects(kw):
    with pytest.raises(InvalidConfigError):
        ExperimentConfig(**kw).validate()


def test_misaligned_thinning_is_alignment_error():
    with pytest.raises(GridAlignmentError):
        ExperimentConfig(M1=80, M2=80).validate()


def test_spectrum_parsing():
    spec = parse_spectrum("1,1:3.0; 2,3:-1.5")
    assert spec.get((2, 3)) == -1.5
    assert parse_spectrum(format_spectrum(spec)) == spec
    assert parse_spectrum("").is_zero()
    assert parse_spectrum("1,1:1;1,1:2").get((1, 1)) == 3.0
    with pytest.raises(InvalidConfigError):
        parse_spectrum("1:3")
    assert format_spectrum(InitialSpectrum.single(1, 1, 3.0)) == "1,1:3.0"
