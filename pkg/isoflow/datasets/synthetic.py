"""
Synthetic data sets: a bimodal Gaussian lying along the bent curve of the modeled
diffeomorphism, and uniform samples on the upper unit hemisphere.
"""

import numpy as np

from isoflow.diffeo.base import Array
from isoflow.diffeo.modeled import ModeledDoubleGaussian
from isoflow.errors import ConfigError
from isoflow.utils.logging import get_logger

logger = get_logger(__name__)


def sample_bimodal_gaussian(
    n: int,
    seed: int = 0,
    center: float = 2.0,
    along_std: float = 0.6,
    across_std: float = 0.1,
) -> Array:
    """
    Equal-weight mixture of two Gaussians placed on the modeled data manifold.

    Each sample draws (s, t) ~ N((±center, 0), diag(along_std², across_std²)) where s runs
    along the manifold and t across it; the latent point (t, tanh(s/2)) is mapped back
    through the modeled diffeomorphism.

    Args:
        n: Number of samples
        seed: RNG seed
        center: Mode offset along the manifold
        along_std: Spread along the manifold
        across_std: Spread across the manifold

    Returns:
        (n, 2) data matrix
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    along = signs * center + along_std * rng.standard_normal(n)
    across = across_std * rng.standard_normal(n)
    latent = np.column_stack([across, np.tanh(0.5 * along)])
    data = ModeledDoubleGaussian().inverse(latent)
    logger.debug("bimodal_gaussian_sampled", n=n, seed=seed)
    return data


def sample_hemisphere(n: int, seed: int = 0, noise_sigma: float = 0.0) -> Array:
    """
    Uniform samples on {x ∈ R³ : ‖x‖ = 1, x₃ ≥ 0} with optional ambient Gaussian noise.

    Args:
        n: Number of samples
        seed: RNG seed
        noise_sigma: Standard deviation of added noise

    Returns:
        (n, 3) data matrix
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if noise_sigma < 0.0:
        raise ConfigError(f"noise_sigma must be >= 0, got {noise_sigma}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, 3))
    x = g / np.linalg.norm(g, axis=1, keepdims=True)
    x[:, 2] = np.abs(x[:, 2])
    if noise_sigma > 0.0:
        x = x + noise_sigma * rng.standard_normal((n, 3))
    logger.debug("hemisphere_sampled", n=n, seed=seed, noise_sigma=noise_sigma)
    return x


def train_validation_split(
    X: Array, validation_fraction: float = 0.1, seed: int = 0
) -> tuple[Array, Array]:
    """
    Seeded random split into training and validation rows.

    Args:
        X: (ℓ, d) data
        validation_fraction: Fraction of rows held out, in [0, 1)
        seed: RNG seed

    Returns:
        Tuple of (train, validation)
    """
    if not 0.0 <= validation_fraction < 1.0:
        raise ConfigError(f"validation_fraction must lie in [0, 1), got {validation_fraction}")
    perm = np.random.default_rng(seed).permutation(len(X))
    held = int(round(validation_fraction * len(X)))
    return X[perm[held:]], X[perm[:held]]


SAMPLERS = {
    "double_gaussian": sample_bimodal_gaussian,
    "hemisphere": sample_hemisphere,
}
