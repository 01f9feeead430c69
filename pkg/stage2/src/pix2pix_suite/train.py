"""Adversarial + L1 training loop for one acquisition's generator."""

from __future__ import annotations

import torch
from torch import nn

from .config import TrainConfig
from .data import PairedDataset, build_dataset
from .networks import PatchDiscriminator, UNetGenerator

CHECKPOINT_VERSION = 1


def build_models(config: TrainConfig) -> tuple[UNetGenerator, PatchDiscriminator]:
    torch.manual_seed(config.seed)
    generator = UNetGenerator(config.image_size, config.base_filters)
    discriminator = PatchDiscriminator(config.base_filters)
    return generator, discriminator


def train_step(generator, discriminator, opt_g, opt_d, condition, target,
               l1_weight: float) -> dict[str, float]:
    """One optimization step for both networks; returns the loss terms."""
    bce = nn.BCEWithLogitsLoss()
    l1 = nn.L1Loss()

    # discriminator: real pairs vs detached fakes
    fake = generator(condition)
    pred_real = discriminator(condition, target)
    pred_fake = discriminator(condition, fake.detach())
    loss_d = 0.5 * (bce(pred_real, torch.ones_like(pred_real))
                    + bce(pred_fake, torch.zeros_like(pred_fake)))
    opt_d.zero_grad()
    loss_d.backward()
    opt_d.step()

    # generator: fool the discriminator + weighted L1 to the target
    pred_fake = discriminator(condition, fake)
    loss_adv = bce(pred_fake, torch.ones_like(pred_fake))
    loss_l1 = l1(fake, target)
    loss_g = loss_adv + l1_weight * loss_l1
    opt_g.zero_grad()
    loss_g.backward()
    opt_g.step()

    return {"d": loss_d.item(), "g": loss_g.item(),
            "adv": loss_adv.item(), "l1": loss_l1.item()}


def train(dataset: PairedDataset, config: TrainConfig,
          log=None) -> dict:
    """Train on the paired dataset; returns the checkpoint payload."""
    generator, discriminator = build_models(config)
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.learning_rate,
                             betas=(config.beta1, config.beta2))
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=config.learning_rate,
                             betas=(config.beta1, config.beta2))
    epoch_losses = []
    for epoch in range(config.epochs):
        sums = {"d": 0.0, "g": 0.0, "adv": 0.0, "l1": 0.0}
        batches = 0
        for condition, target in dataset.batches(config.batch_size):
            losses = train_step(generator, discriminator, opt_g, opt_d,
                                condition, target, config.l1_weight)
            for k in sums:
                sums[k] += losses[k]
            batches += 1
        means = {k: v / batches for k, v in sums.items()}
        epoch_losses.append(means)
        if log is not None:
            log(f"epoch {epoch + 1}/{config.epochs}: "
                + " ".join(f"{k}={v:.4f}" for k, v in means.items()))
    return {
        "version": CHECKPOINT_VERSION,
        "config": config.__dict__,
        "generator": generator.state_dict(),
        "discriminator": discriminator.state_dict(),
        "epoch_losses": epoch_losses,
    }


def train_command(manifest_path: str, stage1_dir: str, config: TrainConfig,
                  checkpoint_path: str, log=print) -> dict:
    dataset = build_dataset(manifest_path, stage1_dir, config.acquisition,
                            config.image_size)
    payload = train(dataset, config, log=log)
    torch.save(payload, checkpoint_path)
    return payload
