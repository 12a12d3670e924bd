"""Experiment file validation and default resolution."""

import math

import pytest
import toml

from src.spherical_hmc.config import build_config, resolve_spec, validate_config
from src.spherical_hmc.constants import HARNESS_CONSTANTS, SAMPLER_CONSTANTS
from src.spherical_hmc.entity import ExperimentSpec, SamplerConfig
from src.spherical_hmc.exception import ConfigValidationError


def test_minimal_truncated_gaussian_is_completed(write_config):
    config = validate_config(write_config({"kind": "truncated-gaussian", "dimension": 2}))
    spec = config.spec
    assert spec.samplers == ["sph"]
    assert spec.constraint == {"type": "rectangle", "lower": [0.0, 0.0], "upper": [5.0, 1.0]}
    assert spec.mean == [0.0, 0.0]
    assert spec.covariance == [[1.0, 0.5], [0.5, 1.0]]
    assert spec.sampler_settings["sph"].trajectory_length == pytest.approx(math.pi)


def test_explicit_epsilon_keeps_the_sph_step(write_config):
    config = validate_config(
        write_config({"kind": "truncated-gaussian", "dimension": 4, "sampler_settings": {"sph": {"epsilon": 0.05}}})
    )
    cfg = config.sampler_config("sph", 7)
    assert cfg.trajectory_length is None and cfg.step_size == 0.05 and cfg.seed == 7


def test_resolution_is_idempotent(small_gaussian_config):
    config = build_config(small_gaussian_config)
    again = resolve_spec(ExperimentSpec.model_validate(config.resolved()))
    assert again.model_dump(mode="json") == config.resolved()


def test_toml_files_are_accepted(tmp_path):
    path = tmp_path / "experiment.toml"
    path.write_text(toml.dumps({"kind": "truncated-gaussian", "dimension": 3, "samplers": ["rwm"]}))
    config = validate_config(path)
    assert config.dimension == 3 and config.spec.samplers == ["rwm"]


def test_missing_file():
    with pytest.raises(ConfigValidationError, match="config: file not found"):
        validate_config("does/not/exist.yaml")


@pytest.mark.parametrize(
    "raw, message",
    [
        ({"kind": "truncated-gaussian", "dimension": 2, "colour": "red"}, "colour"),
        ({"kind": "poisson", "dimension": 2}, "kind"),
        ({"kind": "truncated-gaussian", "dimension": 2, "num_iter": 10, "burn_in": 10}, "burn_in"),
        ({"kind": "truncated-gaussian"}, "dimension: required"),
        ({"kind": "truncated-gaussian", "dimension": 2, "samplers": ["nuts"]}, "samplers"),
        ({"kind": "truncated-gaussian", "dimension": 2, "seeds": [-1]}, "seeds"),
        ({"kind": "bridge"}, "q: required"),
        ({"kind": "lasso", "q": 2.0}, "q: a lasso experiment has q = 1"),
        ({"kind": "lasso", "dimension": 7}, "dimension: 7 conflicts"),
        ({"kind": "copula"}, "n_neurons: required"),
        ({"kind": "copula", "n_neurons": 3, "coupling": [0.1, 0.1]}, "coupling"),
        ({"kind": "truncated-gaussian", "dimension": 2, "s_grid": [0.5]}, "s_grid"),
        ({"kind": "lasso", "s_grid": [0.0, 0.5]}, "s_grid"),
        ({"kind": "truncated-gaussian", "dimension": 2, "sampler_settings": {"rwm": {}}}, "unused sampler"),
        ({"kind": "truncated-gaussian", "dimension": 2, "sampler_settings": {"sph": {"epsilon": -1}}}, "epsilon"),
        (
            {"kind": "truncated-gaussian", "dimension": 2, "constraint": {"type": "qnorm", "q": 1.0, "dim": 3}},
            "constraint: has dimension 3",
        ),
        (
            {"kind": "truncated-gaussian", "dimension": 2, "constraint": {"type": "rectangle", "lower": [0, 0], "upper": [0, 1]}},
            "constraint.",
        ),
        (
            {"kind": "truncated-gaussian", "dimension": 2, "samplers": ["wall"], "constraint": {"type": "ball", "dim": 2}},
            "wall HMC",
        ),
        ({"kind": "bridge", "q": 0.8, "samplers": ["wall"]}, "wall HMC"),
        ({"kind": "truncated-gaussian", "dimension": 2, "sampler_settings": {"sph": {"curvature_step": 0.5}}}, "curvature_step"),
        ({"kind": "lasso", "samplers": ["rwm"], "sampler_settings": {"rwm": {"curvature_step": 0.5}}}, "curvature_step"),
        (
            {"kind": "lasso", "sampler_settings": {"sph": {"curvature_step": 0.5, "trajectory_length": 1.0}}},
            "conflicts with trajectory_length",
        ),
    ],
)
def test_invalid_configurations(raw, message):
    with pytest.raises(ConfigValidationError, match=message):
        build_config(raw)


def test_regression_spherical_steps_follow_the_curvature():
    lasso = build_config({"kind": "lasso"}).spec.sampler_settings["sph"]
    assert lasso.curvature_step == SAMPLER_CONSTANTS.CURVATURE_STEP and lasso.trajectory_length is None
    explicit = build_config({"kind": "bridge", "q": 1.2, "sampler_settings": {"sph": {"epsilon": 0.01}}})
    assert explicit.spec.sampler_settings["sph"].curvature_step is None
    rectangle = {"type": "rectangle", "lower": [-1.0] * 10, "upper": [1.0] * 10}
    boxed = build_config({"kind": "lasso", "constraint": rectangle}).spec.sampler_settings["sph"]
    assert boxed.curvature_step is None and boxed.trajectory_length == pytest.approx(2 * math.pi / 10)


def test_defaults_come_from_the_constants():
    cfg = SamplerConfig()
    assert cfg.epsilon == SAMPLER_CONSTANTS.DEFAULT_EPSILON
    assert cfg.num_leapfrog == SAMPLER_CONSTANTS.DEFAULT_NUM_LEAPFROG
    assert cfg.proposal_scale == SAMPLER_CONSTANTS.DEFAULT_PROPOSAL_SCALE
    assert cfg.max_reflections == SAMPLER_CONSTANTS.MAX_REFLECTIONS
    assert ExperimentSpec(kind="lasso").output_dir == HARNESS_CONSTANTS.ARTIFACTS_DIR


def test_regression_dimension_and_copula_dimension():
    assert build_config({"kind": "lasso"}).dimension == 10
    assert build_config({"kind": "bridge", "q": 1.2}).dimension == 10
    assert build_config({"kind": "copula", "n_neurons": 5}).dimension == 10
    assert build_config({"kind": "copula", "n_neurons": 4}).spec.constraint is None


def test_cli_overrides_win(small_gaussian_config, tmp_path):
    config = build_config(
        small_gaussian_config,
        overrides={"output_dir": str(tmp_path / "other"), "seeds": [9], "samplers": ["sph"], "workers": None},
    )
    assert config.output_dir == tmp_path / "other"
    assert config.spec.seeds == [9]
    assert config.spec.samplers == ["sph"]
    assert list(config.spec.sampler_settings) == ["sph"]
    assert config.spec.workers == 1


def test_output_paths(small_gaussian_config):
    config = build_config(small_gaussian_config)
    assert config.summary_path == config.output_dir / HARNESS_CONSTANTS.SUMMARY_FILE
    assert config.draws_path("wall", 3).name == "draws_wall_seed3.csv"
    assert config.report_path("rwm", 0).name == "report_rwm_seed0.json"


@pytest.mark.parametrize(
    "name", ["config.yaml", "truncated_gaussian_d10.yaml", "truncated_gaussian_d100.yaml", "lasso.yaml",
             "bridge_q08.yaml", "bridge_q12.yaml", "copula.yaml"],
)
def test_shipped_experiment_files_validate(name):
    config = validate_config(HARNESS_CONSTANTS.RAW_CONFIG_DIR / name)
    assert config.dimension >= 2
