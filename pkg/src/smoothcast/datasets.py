"""Synthetic piecewise-linear regression data with abrupt regime switches.

The generator draws a small pool of latent coefficient vectors, splits the
horizon into equal segments, assigns each segment one latent vector (never
repeating the previous segment's), and emits y_t = <w_seg(t), x_t> + noise
clipped into [-bound, bound], with standard normal features.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ConfigurationError

# Latent coefficient radius as a fraction of the outcome bound.  Clean
# responses then sit at 3 standard deviations inside the clipping interval
# (clipping touches ~0.3% of samples) while regime switches stay large
# relative to the observation noise.
DEFAULT_RADIUS_FRACTION = 1.0 / 3.0
# Observation noise as a fraction of the latent radius.
DEFAULT_NOISE_FRACTION = 0.05


@dataclass(frozen=True)
class SwitchingDatasetConfig:
    steps: int = 3000
    n_features: int = 20
    segments: int = 7
    n_models: int = 3
    bound: float = 1.0
    latent_radius: Optional[float] = None
    noise_std: Optional[float] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.steps < 1 or self.n_features < 1:
            raise ConfigurationError("steps and n_features must be at least 1")
        if not 1 <= self.segments <= self.steps:
            raise ConfigurationError("segments must lie in [1, steps]")
        if self.n_models < 1:
            raise ConfigurationError("n_models must be at least 1")
        if self.bound <= 0:
            raise ConfigurationError("bound must be positive")
        if self.latent_radius is not None and self.latent_radius <= 0:
            raise ConfigurationError("latent_radius must be positive")
        if self.noise_std is not None and self.noise_std < 0:
            raise ConfigurationError("noise_std must be nonnegative")

    @property
    def radius(self) -> float:
        return (
            DEFAULT_RADIUS_FRACTION * self.bound
            if self.latent_radius is None
            else self.latent_radius
        )

    @property
    def noise(self) -> float:
        return DEFAULT_NOISE_FRACTION * self.radius if self.noise_std is None else self.noise_std


@dataclass(frozen=True)
class SwitchingDataset:
    config: SwitchingDatasetConfig
    x: np.ndarray
    y: np.ndarray
    segment_starts: np.ndarray
    segment_models: np.ndarray
    latents: np.ndarray

    @property
    def steps(self) -> int:
        return self.y.size


def generate_switching_dataset(config: SwitchingDatasetConfig) -> SwitchingDataset:
    """Draw one dataset; identical configs (seed included) give identical data."""
    rng = np.random.default_rng(config.seed)
    k = config.n_features
    # Latent vectors with norm exactly `radius`, directions uniform on the sphere.
    raw = rng.standard_normal((config.n_models, k))
    latents = config.radius * raw / np.linalg.norm(raw, axis=1, keepdims=True)

    starts = np.floor(
        np.arange(config.segments) * config.steps / config.segments
    ).astype(int)
    models = np.zeros(config.segments, dtype=int)
    models[0] = rng.integers(config.n_models)
    for j in range(1, config.segments):
        if config.n_models == 1:
            models[j] = 0
            continue
        pick = rng.integers(config.n_models - 1)
        models[j] = pick if pick < models[j - 1] else pick + 1

    x = rng.standard_normal((config.steps, k))
    seg_of_step = np.searchsorted(starts, np.arange(config.steps), side="right") - 1
    coef = latents[models[seg_of_step]]
    clean = np.einsum("tk,tk->t", x, coef)
    y = clean + config.noise * rng.standard_normal(config.steps)
    np.clip(y, -config.bound, config.bound, out=y)
    return SwitchingDataset(
        config=config,
        x=x,
        y=y,
        segment_starts=starts,
        segment_models=models,
        latents=latents,
    )
