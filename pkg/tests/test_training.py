"""
Tests for the flow loss, the Adam optimizer, training configs and the epoch loop.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from isoflow.datasets.synthetic import sample_bimodal_gaussian
from isoflow.diffeo.linear import AffineLinear, Identity
from isoflow.errors import ConfigError, DataFormatError, ShapeError, TrainingDivergedError
from isoflow.flows.checkpoint import load_checkpoint
from isoflow.flows.model import build_flow
from isoflow.training.config import TrainConfig, load_train_config, preset
from isoflow.training.loss import LOG_2PI, loss_and_grad, loss_terms_and_grad, nll
from isoflow.training.optimizer import AdamState, adam_step
from isoflow.training.trainer import epoch_permutation, train

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def _short_config(epochs: int = 3, batch_size: int = 16, weight_decay: float = 0.0) -> TrainConfig:
    return preset("double_gaussian", seed=0).model_copy(
        update={"epochs": epochs, "batch_size": batch_size, "weight_decay": weight_decay}
    )


# --------------------------------------------------------------------------- loss


def test_nll_reference_values():
    """Test the standard-normal NLL on the identity and on 2I."""
    assert nll(Identity(2), [0.0, 0.0]) == pytest.approx(1.837877, abs=1e-6)
    assert nll(Identity(2), [1.0, 0.0]) == pytest.approx(2.337877, abs=1e-6)
    assert nll(AffineLinear(2.0 * np.eye(2)), [0.0, 0.0]) == pytest.approx(0.451583, abs=1e-6)
    assert LOG_2PI == pytest.approx(1.837877, abs=1e-6)


def test_nll_batches(identity2):
    """Test batched NLL returns one value per row."""
    values = nll(identity2, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]))
    np.testing.assert_allclose(values, [LOG_2PI, LOG_2PI + 0.5, LOG_2PI + 2.0])


def test_loss_batch_of_one_matches_single_sample(perturbed_flow, vector_config, rng):
    """Test a batch of one gives the single-sample gradient of the NLL."""
    model = perturbed_flow(vector_config)
    x = rng.normal(size=2)
    loss, grad = loss_and_grad(model, x[None, :], weight_decay=0.0)
    assert loss == pytest.approx(nll(model, x))
    expected, _ = model.vjp(x, model.forward(x), -1.0)
    np.testing.assert_allclose(grad, expected, rtol=1e-12, atol=1e-14)


def test_weight_decay_gradient_is_lambda_theta(perturbed_flow, vector_config, rng):
    """Test the decay term adds λθ to the gradient and (λ/2)‖θ‖² to the loss."""
    model = perturbed_flow(vector_config)
    batch = rng.normal(size=(8, 2))
    plain_terms, plain_grad = loss_terms_and_grad(model, batch, 0.0)
    terms, grad = loss_terms_and_grad(model, batch, 0.5)
    theta = model.params.values
    np.testing.assert_allclose(grad - plain_grad, 0.5 * theta, atol=1e-12)
    assert terms.weight_decay == pytest.approx(0.25 * float(theta @ theta))
    assert terms.nll == pytest.approx(plain_terms.nll)
    assert terms.total == pytest.approx(terms.nll + terms.weight_decay)


@pytest.mark.parametrize("config_name", ["vector_config", "feedforward_config", "image_config"])
def test_loss_gradient_matches_finite_difference(config_name, perturbed_flow, rng, request):
    """Test the loss gradient on random coordinates by central differences."""
    model = perturbed_flow(request.getfixturevalue(config_name))
    batch = rng.normal(size=(5, model.dim))
    _, grad = loss_and_grad(model, batch, 0.1)
    theta = model.params.values.copy()
    step = 1e-5
    for i in rng.choice(len(theta), size=min(15, len(theta)), replace=False):
        model.params.values[i] = theta[i] + step
        plus, _ = loss_and_grad(model, batch, 0.1)
        model.params.values[i] = theta[i] - step
        minus, _ = loss_and_grad(model, batch, 0.1)
        model.params.values[i] = theta[i]
        fd = (plus - minus) / (2.0 * step)
        assert abs(grad[i] - fd) <= 1e-4 * max(abs(fd), abs(grad[i])) + 1e-7


def test_loss_rejects_empty_batch(perturbed_flow, vector_config):
    """Test an empty batch is rejected."""
    model = perturbed_flow(vector_config)
    with pytest.raises(ShapeError):
        loss_and_grad(model, np.zeros((0, 2)), 0.0)


# --------------------------------------------------------------------------- adam


def test_adam_zero_gradient_keeps_parameters():
    """Test a zero gradient leaves parameters unchanged."""
    params = np.array([1.0, -2.0, 3.0])
    state = AdamState.zeros(3)
    adam_step(state, params, np.zeros(3))
    np.testing.assert_array_equal(params, [1.0, -2.0, 3.0])
    assert state.step == 1


def test_adam_first_step():
    """Test the first update is −lr·g/(|g| + ε) elementwise."""
    g = np.array([0.5, -2.0, 1e-3])
    params = np.zeros(3)
    adam_step(AdamState.zeros(3), params, g, lr=0.01, eps=1e-8)
    np.testing.assert_allclose(params, -0.01 * g / (np.abs(g) + 1e-8), rtol=1e-12)


def test_adam_updates_in_place_and_checks_shapes():
    """Test the returned arrays are the ones passed in and mismatched shapes fail."""
    params = np.ones(2)
    state = AdamState.zeros(2)
    new_state, new_params = adam_step(state, params, np.ones(2))
    assert new_state is state
    assert new_params is params
    with pytest.raises(ShapeError):
        adam_step(state, params, np.ones(3))


# --------------------------------------------------------------------------- config


def test_train_config_validation():
    """Test zero epochs, bad betas and unknown keys are rejected."""
    base = preset("double_gaussian").model_dump(mode="json")
    for change in ({"epochs": 0}, {"betas": [0.9, 1.0]}, {"batch_size": 0}, {"optimizer": "sgd"}):
        with pytest.raises(ConfigError):
            TrainConfig.parse({**base, **change})


def test_presets():
    """Test the reference presets and unknown names."""
    dg = preset("double_gaussian", seed=4)
    assert (dg.epochs, dg.batch_size, dg.weight_decay, dg.seed) == (500, 16, 0.2, 4)
    assert dg.flow.dim == 2 and dg.flow.blocks == 2
    hemisphere = preset("hemisphere")
    assert hemisphere.flow.dim == 3 and hemisphere.weight_decay == 0.02
    mnist = preset("mnist")
    assert mnist.flow.image_shape == (1, 28, 28) and mnist.flow.blocks == 6
    reduced = preset("mnist_reduced")
    assert (reduced.epochs, reduced.batch_size, reduced.flow.blocks) == (5, 32, 2)
    with pytest.raises(ConfigError):
        preset("imagenet")


@pytest.mark.parametrize(
    "filename, name",
    [
        ("double_gaussian.json", "double_gaussian"),
        ("hemisphere.json", "hemisphere"),
        ("mnist_reduced.yaml", "mnist_reduced"),
    ],
)
def test_shipped_configs_match_presets(filename, name):
    """Test the files under configs/ parse to the matching presets."""
    assert load_train_config(CONFIG_DIR / filename) == preset(name)


def test_load_train_config_errors(tmp_path):
    """Test missing files, unparsable files and non-object payloads."""
    with pytest.raises(DataFormatError):
        load_train_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_train_config(bad)
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_train_config(listing)


# --------------------------------------------------------------------------- trainer


def test_epoch_permutation_is_seeded():
    """Test shuffles depend only on (seed, epoch)."""
    np.testing.assert_array_equal(epoch_permutation(20, 1, 3), epoch_permutation(20, 1, 3))
    assert not np.array_equal(epoch_permutation(20, 1, 3), epoch_permutation(20, 1, 4))
    assert sorted(epoch_permutation(20, 1, 3)) == list(range(20))


def test_train_decreases_nll():
    """Test the mean NLL of the last epoch is below that of the first."""
    X = sample_bimodal_gaussian(256, seed=0)
    cfg = _short_config(epochs=25)
    model, report = train(build_flow(cfg.flow, seed=cfg.seed), X, cfg)
    assert len(report.epochs) == 25
    assert report.epochs[-1].nll < report.epochs[0].nll
    assert model.actnorm_initialized
    assert report.points == 256


def test_large_weight_decay_shrinks_parameters():
    """Test ‖θ‖ shrinks every epoch once λ dominates the loss."""
    X = sample_bimodal_gaussian(128, seed=1)
    cfg = _short_config(epochs=6, weight_decay=1e3)
    _, report = train(build_flow(cfg.flow, seed=0), X, cfg)
    decay = [record.weight_decay for record in report.epochs]
    assert all(later < earlier for earlier, later in zip(decay[1:], decay[2:]))


def test_training_is_deterministic():
    """Test two runs with the same seed give bit-identical parameters."""
    X = sample_bimodal_gaussian(50, seed=2)
    cfg = _short_config(epochs=2, batch_size=8)
    first, _ = train(build_flow(cfg.flow, seed=cfg.seed), X, cfg)
    second, _ = train(build_flow(cfg.flow, seed=cfg.seed), X, cfg)
    np.testing.assert_array_equal(first.params.values, second.params.values)


def test_training_outputs(tmp_path):
    """Test the checkpoint, JSON report and loss history written by a run."""
    X = sample_bimodal_gaussian(10, seed=3)
    cfg = _short_config(epochs=2, batch_size=4)
    model, report = train(
        build_flow(cfg.flow, seed=0), X, cfg, checkpoint_path=tmp_path / "ckpt.json"
    )
    assert report.checkpoint_path == str(tmp_path / "ckpt.json")
    np.testing.assert_array_equal(load_checkpoint(tmp_path / "ckpt.json").params.values,
                                  model.params.values)

    history = report.history_frame()
    assert list(history.columns) == ["epoch", "nll", "weight_decay", "loss", "seconds"]
    assert history["epoch"].tolist() == [0, 1]

    payload = json.loads(report.write_json(tmp_path / "report.json").read_text())
    assert payload["config"]["epochs"] == 2
    assert len(payload["epochs"]) == 2
    assert report.write_history_csv(tmp_path / "history.csv").read_text().startswith("epoch,")


def test_training_divergence_is_reported(vector_config):
    """Test a non-finite parameter stops training with the offending block names."""
    cfg = _short_config(epochs=1)
    model = build_flow(vector_config, seed=0)
    model.params.view("block0.coupling.activation")[0, 0] = np.nan
    with pytest.raises(TrainingDivergedError) as excinfo:
        train(model, sample_bimodal_gaussian(20, seed=0), cfg)
    assert excinfo.value.context["blocks"]
    assert excinfo.value.context["epoch"] == 0


def test_training_rejects_empty_data(vector_config):
    """Test training on no points fails with a data error."""
    with pytest.raises(DataFormatError):
        train(build_flow(vector_config), np.zeros((0, 2)), _short_config())
