"""Inference over a Stage-1 output tree: one PNG per case directory."""

from __future__ import annotations

import os

import torch

from .config import TrainConfig
from .data import from_tensor, list_case_dirs, load_conditioning, save_gray, to_tensor
from .errors import MissingCheckpointError
from .networks import UNetGenerator


def load_checkpoint(path: str) -> tuple[UNetGenerator, TrainConfig]:
    if not os.path.exists(path):
        raise MissingCheckpointError(path)
    payload = torch.load(path, map_location="cpu", weights_only=False)
    config = TrainConfig(**payload["config"])
    generator = UNetGenerator(config.image_size, config.base_filters)
    generator.load_state_dict(payload["generator"])
    return generator, config


def infer(checkpoint_path: str, stage1_dir: str, stochastic: bool = False,
          log=print) -> list[str]:
    """Write <acquisition>.png into every readable case directory.

    Deterministic by default (eval mode, dropout off); --stochastic re-enables
    dropout sampling for diversity experiments. Returns the warning list.
    """
    generator, config = load_checkpoint(checkpoint_path)
    generator.eval()
    if stochastic:
        for module in generator.modules():
            if isinstance(module, torch.nn.Dropout):
                module.train()
    warnings = []
    out_name = f"{config.acquisition}.png"
    with torch.no_grad():
        for case_dir in list_case_dirs(stage1_dir):
            cond_path = os.path.join(case_dir, "conditioning.png")
            try:
                condition = to_tensor(load_conditioning(cond_path, config.image_size))
            except Exception as e:
                warnings.append(f"{case_dir}: {e}")
                continue
            fake = generator(condition.unsqueeze(0)).squeeze(0)
            save_gray(from_tensor(fake), os.path.join(case_dir, out_name))
    if log is not None:
        for w in warnings:
            log(f"warning: {w}")
    return warnings
