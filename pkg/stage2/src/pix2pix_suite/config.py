"""Training configuration and the desk-scale toy preset."""

from __future__ import annotations

from dataclasses import dataclass

ACQUISITIONS = ("t1_arterial", "t1_portal", "t2")


@dataclass(frozen=True)
class TrainConfig:
    acquisition: str = "t1_arterial"
    epochs: int = 200
    learning_rate: float = 1e-4
    batch_size: int = 24
    beta1: float = 0.5
    beta2: float = 0.9
    l1_weight: float = 100.0
    image_size: int = 256
    base_filters: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.acquisition not in ACQUISITIONS:
            raise ValueError(f"acquisition must be one of {ACQUISITIONS}")
        for name in ("epochs", "learning_rate", "batch_size", "beta1", "beta2",
                     "l1_weight", "image_size", "base_filters"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.image_size & (self.image_size - 1):
            raise ValueError("image_size must be a power of two")


def toy_preset(acquisition: str = "t1_arterial", seed: int = 0) -> TrainConfig:
    """Small CI-friendly configuration: 64x64 images, 4 base filters, 5 epochs."""
    return TrainConfig(acquisition=acquisition, epochs=5, batch_size=1,
                       image_size=64, base_filters=4, seed=seed)
