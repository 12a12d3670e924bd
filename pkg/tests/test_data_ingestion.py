"""Diabetes and spike-train ingestion, synthetic fallbacks and the data component."""

import numpy as np
import pandas as pd
import pytest
from scipy.stats import chisquare

from src.spherical_hmc.components.data_ingestion import (
    DataIngestionComponents,
    load_diabetes,
    load_spikes,
    synth_spikes,
    synthetic_diabetes_frame,
    write_spikes,
)
from src.spherical_hmc.config import build_config
from src.spherical_hmc.exception import DataIngestionError, ModelConstructionError


def test_synthetic_diabetes_is_standardized_with_known_coefficients(diabetes):
    _, beta_true = synthetic_diabetes_frame()
    assert diabetes.n == 442 and diabetes.dimension == 10
    np.testing.assert_allclose(diabetes.X.mean(axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(np.linalg.norm(diabetes.X, axis=0), np.sqrt(442))
    assert abs(diabetes.y.mean()) < 1e-8
    assert np.abs(diabetes.beta_ols - beta_true).max() < 15.0
    assert diabetes.sigma2_ols == pytest.approx(54.0**2, rel=0.25)
    assert diabetes.column_names == ["age", "sex", "bmi", "map", "tc", "ldl", "hdl", "tch", "ltg", "glu"]


def test_ols_norm_matches_numpy(diabetes):
    assert diabetes.ols_norm(1.0) == pytest.approx(np.abs(diabetes.beta_ols).sum())
    assert diabetes.ols_norm(2.0) == pytest.approx(np.linalg.norm(diabetes.beta_ols))


def test_synthetic_frame_is_seeded():
    first, _ = synthetic_diabetes_frame(seed=3)
    second, _ = synthetic_diabetes_frame(seed=3)
    pd.testing.assert_frame_equal(first, second)


def test_missing_diabetes_file(tmp_path):
    with pytest.raises(DataIngestionError, match="not found"):
        load_diabetes(tmp_path / "nope.csv")


def test_empty_diabetes_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DataIngestionError, match="empty"):
        load_diabetes(path)


def test_non_numeric_rows_are_reported_by_line(tmp_path, diabetes_path):
    lines = diabetes_path.read_text().splitlines()
    fields = lines[2].split(",")
    fields[3] = "n/a"
    lines[2] = ",".join(fields)
    path = tmp_path / "broken.csv"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataIngestionError, match=r"malformed rows .* at lines \[3\]"):
        load_diabetes(path)


def test_wrong_column_count(tmp_path):
    path = tmp_path / "narrow.csv"
    pd.DataFrame({"age": [1.0, 2.0], "y": [3.0, 4.0]}).to_csv(path, index=False)
    with pytest.raises(DataIngestionError, match="expected 11 columns"):
        load_diabetes(path)


def test_other_header_names_use_column_order(tmp_path, diabetes_path, diabetes):
    frame = pd.read_csv(diabetes_path)
    frame.columns = [f"c{i}" for i in range(11)]
    path = tmp_path / "renamed.csv"
    frame.to_csv(path, index=False, float_format="%.17g")
    np.testing.assert_allclose(load_diabetes(path).beta_ols, diabetes.beta_ols, rtol=1e-10)


def test_constant_predictor_cannot_be_standardized(tmp_path, diabetes_path):
    frame = pd.read_csv(diabetes_path)
    frame["tc"] = 1.0
    path = tmp_path / "constant.csv"
    frame.to_csv(path, index=False)
    with pytest.raises(DataIngestionError, match="zero-variance"):
        load_diabetes(path)


def test_spikes_file_round_trip(tmp_path):
    data = synth_spikes(3, 400, 0.1, seed=1)
    path = tmp_path / "spikes.csv"
    write_spikes(data, path)
    loaded = load_spikes(path)
    np.testing.assert_array_equal(loaded.spikes, data.spikes)
    np.testing.assert_allclose(loaded.firing_probs, data.spikes.mean(axis=1))


def test_spikes_must_be_binary(tmp_path):
    path = tmp_path / "spikes.csv"
    path.write_text("0,1,2\n1,0,1\n")
    with pytest.raises(DataIngestionError, match="0/1"):
        load_spikes(path)


def test_synth_spikes_is_seeded_and_hits_the_marginals():
    probs = [0.2, 0.3, 0.4]
    first = synth_spikes(3, 20_000, [0.3, -0.2, 0.1], seed=5, firing_probs=probs)
    second = synth_spikes(3, 20_000, [0.3, -0.2, 0.1], seed=5, firing_probs=probs)
    np.testing.assert_array_equal(first.spikes, second.spikes)
    assert first.spikes.shape == (3, 20_000)
    np.testing.assert_allclose(first.firing_probs, probs, atol=0.02)


def test_synth_spikes_positive_coupling_raises_joint_firing():
    probs = [0.3, 0.3]
    coupled = synth_spikes(2, 50_000, [0.9], seed=0, firing_probs=probs).spikes
    joint = np.mean(coupled[0] & coupled[1])
    # P(both fire) = p0 p1 (1 + beta q0 q1)
    assert joint == pytest.approx(0.09 * (1.0 + 0.9 * 0.49), abs=0.01)


def test_synth_spikes_without_coupling_fire_independently():
    probs = np.array([0.2, 0.3, 0.4])
    spikes = synth_spikes(3, 20_000, 0.0, seed=11, firing_probs=probs).spikes
    codes = (spikes.astype(int) << np.arange(3)[:, None]).sum(axis=0)
    observed = np.bincount(codes, minlength=8)
    bits = (np.arange(8)[:, None] >> np.arange(3)) & 1
    expected = np.prod(np.where(bits == 1, probs, 1.0 - probs), axis=1) * spikes.shape[1]
    assert chisquare(observed, expected).pvalue > 1e-3


def test_synth_spikes_rejects_invalid_coupling():
    with pytest.raises(ModelConstructionError, match="coupling"):
        synth_spikes(3, 100, [0.5, 0.5, 0.5], seed=0)
    with pytest.raises(ModelConstructionError, match="firing_probs"):
        synth_spikes(3, 100, 0.1, seed=0, firing_probs=[0.2, 1.0, 0.3])


def test_component_writes_the_synthetic_regression_fallback(tmp_path):
    config = build_config({"kind": "lasso", "output_dir": str(tmp_path)})
    result = DataIngestionComponents(config).run()
    assert result.synthetic
    assert result.source_path == config.synthetic_diabetes_path
    assert result.source_path.is_file()
    assert result.regression.dimension == 10
    assert len(result.beta_true) == 10


def test_component_reads_a_given_diabetes_file(tmp_path, diabetes_path):
    config = build_config({"kind": "lasso", "data_path": str(diabetes_path), "output_dir": str(tmp_path)})
    result = DataIngestionComponents(config).run()
    assert not result.synthetic and result.source_path == diabetes_path
    assert not config.synthetic_diabetes_path.exists()


def test_component_synthesizes_spikes(tmp_path):
    config = build_config(
        {"kind": "copula", "n_neurons": 3, "n_bins": 500, "coupling": [0.2], "output_dir": str(tmp_path)}
    )
    result = DataIngestionComponents(config).run()
    assert result.spikes.n_neurons == 3 and result.spikes.n_bins == 500
    assert result.beta_true == [0.2, 0.2, 0.2]
    np.testing.assert_array_equal(load_spikes(config.synthetic_spikes_path).spikes, result.spikes.spikes)


def test_component_needs_no_data_for_a_truncated_gaussian(tmp_path):
    config = build_config({"kind": "truncated-gaussian", "dimension": 2, "output_dir": str(tmp_path)})
    result = DataIngestionComponents(config).run()
    assert result.regression is None and result.spikes is None
