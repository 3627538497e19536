"""Gradient-sign adversarial input generation (single-step and iterative).

Both attacks perturb within an L-infinity ball of radius epsilon around
the original input and clip back into the valid input domain; they are
deterministic given model, input, and config.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ArgumentError
from .model import Model, _loss_and_grads64
from .tensor import Tensor


@dataclass(frozen=True)
class AttackConfig:
    epsilon: float = 0.3
    alpha: float = 0.05
    iterations: int = 10
    clip_min: float = 0.0
    clip_max: float = 1.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ArgumentError("epsilon must be >= 0")
        if self.alpha < 0:
            raise ArgumentError("alpha must be >= 0")
        if self.alpha > self.epsilon:
            raise ArgumentError("alpha must not exceed epsilon")
        if self.iterations < 1:
            raise ArgumentError("iterations must be >= 1")
        if not self.clip_min < self.clip_max:
            raise ArgumentError("clip_min must be below clip_max")


def _input_gradient(model: Model, x: Tensor, label: int) -> np.ndarray:
    _, _, _, input_grad = _loss_and_grads64(model, x, label)
    return input_grad.reshape(-1)


def fgsm(model: Model, x: Tensor, label: int, cfg: AttackConfig) -> Tensor:
    """Single step of size epsilon along the sign of the input gradient.

    Gradient coordinates that are exactly zero contribute no perturbation
    (three-valued sign), so saturated inputs are left alone.
    """
    if cfg.epsilon == 0.0:
        return x
    grad = _input_gradient(model, x, label)
    step = np.float32(cfg.epsilon) * np.sign(grad).astype(np.float32)
    adv = x.data + step
    adv = np.clip(adv, np.float32(cfg.clip_min), np.float32(cfg.clip_max))
    return Tensor(x.shape, adv.astype(np.float32))


def bim(model: Model, x: Tensor, label: int, cfg: AttackConfig) -> Tensor:
    """Iterated alpha-sized sign steps, re-projected into the epsilon ball
    around the original input and into the clip bounds after every step."""
    if cfg.epsilon == 0.0:
        return x
    low = np.maximum(x.data - np.float32(cfg.epsilon), np.float32(cfg.clip_min))
    high = np.minimum(x.data + np.float32(cfg.epsilon), np.float32(cfg.clip_max))
    adv = x.data.copy()
    for _ in range(cfg.iterations):
        grad = _input_gradient(model, Tensor(x.shape, adv.astype(np.float32)), label)
        step = np.float32(cfg.alpha) * np.sign(grad).astype(np.float32)
        adv = adv + step
        adv = np.minimum(np.maximum(adv, low), high)
    return Tensor(x.shape, adv.astype(np.float32))


ATTACKS = {"fgsm": fgsm, "bim": bim}


def attack_suite(model: Model, dataset: Dataset, method: str, cfg: AttackConfig) -> Dataset:
    """One adversarial input per original, order preserved, labels kept.

    Input ids get a ':<method>' suffix so provenance survives into trace
    files and reports.
    """
    if method not in ATTACKS:
        raise ArgumentError(f"unknown attack method {method!r}; choose from {sorted(ATTACKS)}")
    if len(dataset) == 0:
        raise ArgumentError("cannot attack an empty dataset")
    attack = ATTACKS[method]
    rows = np.zeros_like(dataset.inputs)
    for i in range(len(dataset)):
        adv = attack(model, Tensor.row(dataset.inputs[i]), int(dataset.labels[i]), cfg)
        rows[i] = adv.data
    return Dataset(
        rows,
        dataset.labels.copy(),
        dataset.num_classes,
        ids=[f"{name}:{method}" for name in dataset.ids],
        provenance={
            "kind": "attack",
            "method": method,
            "epsilon": cfg.epsilon,
            "alpha": cfg.alpha,
            "iterations": cfg.iterations,
            "source": dataset.provenance,
        },
    )
