import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmhmc.config import (ExperimentConfig, ModelSpec, RunSpec, SamplerSpec, emit_config, load_config,
                          parse_config)
from mmhmc.errors import ConfigError
from mmhmc.integrators import CATALOG

MINIMAL = "model.name = gaussian\nmodel.dim = 10\nsampler.kind = mmhmc\n"


def test_minimal_config_uses_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.model == ModelSpec(name="gaussian", dim=10)
    assert cfg.sampler == SamplerSpec()
    assert cfg.run == RunSpec()
    assert cfg.scheme() is CATALOG["verlet"]


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\nsampler.h = 0.05   # step\nrun.seed=3\n")
    assert cfg.sampler.h == 0.05 and cfg.run.seed == 3


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as exc:
        parse_config(MINIMAL + "sampler.stepsize = 0.1\n")
    assert "sampler.stepsize" in str(exc.value) and exc.value.line == 4
    with pytest.raises(ConfigError, match="stepsize"):
        parse_config("stepsize = 0.1\n")


def test_phi_out_of_range():
    with pytest.raises(ConfigError, match="sampler.phi"):
        parse_config(MINIMAL + "sampler.phi = 1.5\n")
    with pytest.raises(ConfigError, match="sampler.phi"):
        parse_config(MINIMAL + "sampler.phi = 0\n")
    assert parse_config(MINIMAL + "sampler.phi = 1\n").sampler.phi == 1.0


@pytest.mark.parametrize("text,line", [("model.name = gaussian\nnonsense\n", 2),
                                       ("\n\nsampler.L = ten\n", 3),
                                       ("run.seed = 1\nrun.seed = 2\n", 2),
                                       ("= 4\n", 1)])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line


@pytest.mark.parametrize("extra,key", [
    ("sampler.integrator = rk4", "sampler.integrator"),
    ("sampler.shadow_order = 6\nsampler.integrator = m-me3", "sampler.shadow_order"),
    ("sampler.family = two_stage\nsampler.params = 0.2 0.3", "sampler.params"),
    ("sampler.h = -1", "sampler.h"),
    ("run.thin = 0", "run.thin"),
    ("model.name = blr", "model.data"),
    ("sampler.flip = never", "sampler.flip"),
])
def test_validation_names_key(extra, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(extra + "\n")
    assert exc.value.key == key


def test_family_params_scheme():
    cfg = parse_config(MINIMAL + "sampler.family = three_stage\nsampler.params = 0.355423, 0.184569\n")
    s = cfg.scheme()
    assert s.family == "three_stage" and s.params == (0.355423, 0.184569)


def test_load_config_resolves_data(tmp_path):
    (tmp_path / "d.csv").write_text("x,y\n0,0\n1,1\n")
    (tmp_path / "c.cfg").write_text("model.name = blr\nmodel.data = d.csv\n")
    cfg = load_config(tmp_path / "c.cfg")
    assert cfg.model.data == str((tmp_path / "d.csv").resolve())
    (tmp_path / "bad.cfg").write_text("model.name = blr\nmodel.data = missing.csv\n")
    with pytest.raises(ConfigError) as exc:
        load_config(tmp_path / "bad.cfg")
    assert exc.value.key == "model.data"
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


finite = dict(allow_nan=False, allow_infinity=False)
configs = st.builds(
    ExperimentConfig,
    model=st.builds(ModelSpec, name=st.sampled_from(["gaussian", "banana", "sv"]), dim=st.integers(1, 500),
                    wishart=st.booleans(), alpha=st.floats(1e-3, 1e4, **finite), n_obs=st.integers(1, 10**4),
                    data_seed=st.integers(0, 2**31), beta=st.floats(0.01, 5, **finite),
                    sigma=st.floats(0.01, 5, **finite), phi=st.floats(-0.99, 0.99, **finite)),
    sampler=st.builds(SamplerSpec, kind=st.just("mmhmc"), integrator=st.sampled_from(sorted(CATALOG)),
                      shadow_order=st.just(4), shadow_mode=st.sampled_from(["analytic", "numeric"]),
                      h=st.floats(1e-6, 10, **finite), L=st.integers(1, 10**4), phi=st.floats(1e-6, 1, **finite),
                      h_policy=st.sampled_from(["fixed", "uniform"]), phi_policy=st.sampled_from(["fixed", "around"]),
                      flip=st.sampled_from(["automatic", "reduced"]), pmmc=st.sampled_from(["implicit", "explicit"]),
                      theta_h=st.floats(1e-6, 1, **finite), theta_L=st.integers(1, 100)),
    run=st.builds(RunSpec, n_samples=st.integers(1, 10**6), burn_in=st.integers(0, 10**5), thin=st.integers(1, 50),
                  n_chains=st.integers(1, 20), seed=st.integers(0, 2**40)),
    out=st.sampled_from(["results", "out/run 1"]),
)


@given(configs)
def test_round_trip(cfg):
    assert parse_config(emit_config(cfg)) == cfg


@given(st.tuples(st.floats(0.05, 0.45), st.floats(0.05, 0.2)))
def test_round_trip_family_params(params):
    cfg = ExperimentConfig(sampler=SamplerSpec(family="three_stage", params=params))
    assert parse_config(emit_config(cfg)).sampler.params == params
