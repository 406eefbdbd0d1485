from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ..exceptions import EmptyInputError, UsageError
from ..models import Camera, PointCloud, SmapBatch, SmapParams, SyntheticSpace
from .embedding_service import EmbeddingService, l2_normalize
from .geometry_service import GeometryService
from .smap_service import SmapService

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingConfig:
    lr: float = 1e-5
    epochs: int = 20
    poly_power: float = 0.9
    seed: int = 0
    hidden: int = 32
    heads: int = 4
    use_pe: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class TrainingResult:
    params: SmapParams
    epoch_losses: List[float] = field(default_factory=list)
    step_losses: List[float] = field(default_factory=list)
    final_loss: Optional[float] = None


class TrainingService:
    """Distillation of pooled point features onto image-side targets."""

    @staticmethod
    def build_distillation_batch(
        cloud: PointCloud,
        features: np.ndarray,
        cams: Sequence[Camera],
        space: SyntheticSpace,
    ) -> SmapBatch:
        """Camera visibility masks with targets = normalised mean class anchor
        of the points each camera sees; cameras that see nothing are dropped."""
        masks = GeometryService.visibility_masks(cloud, list(cams))
        anchors = EmbeddingService.class_anchors(space, cloud)
        keep = ~masks.empty
        if not keep.any():
            raise EmptyInputError('no camera sees any point; nothing to distil')
        kept = masks.masks[keep]
        counts = kept.sum(axis=1, keepdims=True)
        targets = l2_normalize((kept.astype(np.float64) @ anchors) / counts)
        trimmed = type(masks)(masks=kept, kind=masks.kind, keys=[k for k, ok in zip(masks.keys, keep) if ok])
        return SmapBatch(coords=cloud.coords, features=features, masks=trimmed, targets=targets)

    @staticmethod
    def poly_lr(base_lr: float, step: int, total_steps: int, power: float) -> float:
        return base_lr * (1.0 - step / total_steps) ** power

    @staticmethod
    def train_smap(
        dataset: Sequence[SmapBatch],
        config: TrainingConfig,
        params: Optional[SmapParams] = None,
    ) -> TrainingResult:
        """Adam with polynomial learning-rate decay; batch order is reshuffled
        every epoch from ``config.seed``."""
        if not dataset:
            raise EmptyInputError('training needs at least one batch')
        if config.epochs < 1:
            raise UsageError('epochs must be positive')
        dim = dataset[0].dim
        if params is None:
            params = SmapParams.initialize(dim, hidden=config.hidden, heads=config.heads, seed=config.seed)

        weights = params.as_dict()
        first_moment = params.zeros_like().as_dict()
        second_moment = params.zeros_like().as_dict()
        rng = np.random.default_rng([int(config.seed) & 0xFFFFFFFFFFFFFFFF, 0x7472])
        total_steps = config.epochs * len(dataset)
        result = TrainingResult(params=params)

        step = 0
        for epoch in range(config.epochs):
            epoch_loss = 0.0
            for b in rng.permutation(len(dataset)):
                current = params.with_weights(**weights)
                loss, grads = SmapService.smap_value_and_gradients(dataset[b], current, use_pe=config.use_pe)
                lr_t = TrainingService.poly_lr(config.lr, step, total_steps, config.poly_power)
                step += 1
                bias1 = 1.0 - config.beta1 ** step
                bias2 = 1.0 - config.beta2 ** step
                for name, grad in grads.weights():
                    first_moment[name] = config.beta1 * first_moment[name] + (1.0 - config.beta1) * grad
                    second_moment[name] = config.beta2 * second_moment[name] + (1.0 - config.beta2) * grad * grad
                    update = (first_moment[name] / bias1) / (np.sqrt(second_moment[name] / bias2) + config.eps)
                    weights[name] = weights[name] - lr_t * update
                result.step_losses.append(loss)
                epoch_loss += loss
            result.epoch_losses.append(epoch_loss / len(dataset))
            logger.info('epoch %d/%d loss=%.6g lr=%.3g', epoch + 1, config.epochs,
                        result.epoch_losses[-1], TrainingService.poly_lr(config.lr, step - 1, total_steps, config.poly_power))

        result.params = params.with_weights(**weights)
        result.final_loss = float(np.mean([
            SmapService.smap_value_and_gradients(batch, result.params, use_pe=config.use_pe)[0] for batch in dataset
        ]))
        logger.info('training finished: %d steps, final loss %.6g', total_steps, result.final_loss)
        return result
