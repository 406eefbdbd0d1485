from __future__ import annotations

import logging
from typing import Dict, Optional, Sequence

import numpy as np

from ..exceptions import DimensionMismatchError, EmptyInputError, SchemaError
from ..models import EvalReport, FeatureMatrix, SegmentationResult, SyntheticSpace, Vocabulary, VocabularyMapping
from .embedding_service import EmbeddingService

logger = logging.getLogger(__name__)


class MetricsService:
    """Vocabulary quality, vocabulary mapping and mapped segmentation scores."""

    @staticmethod
    def tpss(point_feats: FeatureMatrix, labels: Vocabulary, space: SyntheticSpace, scale: float = 1.0) -> float:
        """Mean over points of the best label similarity, times ``scale``."""
        if len(labels) == 0:
            raise EmptyInputError('TPSS needs at least one label')
        if point_feats.rows == 0:
            raise EmptyInputError('TPSS needs at least one point feature')
        text = EmbeddingService.encode_texts(space, labels).values
        best = EmbeddingService.similarity_matrix(point_feats.values, text).max(axis=1)
        return float(best.mean()) * float(scale)

    @staticmethod
    def compare_label_sets(
        point_feats: FeatureMatrix,
        label_sets: Dict[str, Vocabulary],
        space: SyntheticSpace,
        scale: float = 1.0,
    ) -> Dict[str, float]:
        return {name: MetricsService.tpss(point_feats, labels, space, scale) for name, labels in label_sets.items()}

    @staticmethod
    def map_vocabulary(auto: Vocabulary, targets: Vocabulary, space: SyntheticSpace) -> VocabularyMapping:
        """Send every auto label to its most similar target (lowest index on ties)."""
        auto.require_non_empty('auto vocabulary')
        targets.require_non_empty('target vocabulary')
        sims = EmbeddingService.similarity_matrix(
            EmbeddingService.encode_texts(space, auto).values,
            EmbeddingService.encode_texts(space, targets).values,
        )
        best = np.argmax(sims, axis=1)
        pairs = tuple(
            (tag, targets[int(t)], float(sims[i, t])) for i, (tag, t) in enumerate(zip(auto, best))
        )
        logger.debug('map_vocabulary: %d auto labels onto %d targets', len(auto), len(targets))
        return VocabularyMapping(pairs=pairs, targets=targets)

    @staticmethod
    def remap_predictions(result: SegmentationResult, mapping: VocabularyMapping) -> np.ndarray:
        """Per-point target class indices."""
        lookup = mapping.as_dict()
        missing = [tag for tag in result.vocabulary if tag not in lookup]
        if missing:
            raise SchemaError(f'mapping does not cover auto labels: {", ".join(missing)}')
        table = np.array([mapping.targets.index(lookup[tag]) for tag in result.vocabulary], dtype=np.int64)
        return table[result.labels]

    @staticmethod
    def evaluate(
        pred: np.ndarray,
        gt: np.ndarray,
        num_classes: int,
        class_names: Optional[Sequence[str]] = None,
        tpss: Optional[float] = None,
    ) -> EvalReport:
        """Confusion matrix (rows = ground truth), per-class IoU and mIoU.

        Classes absent from both prediction and ground truth are undefined:
        reported, but left out of the mean.
        """
        pred = np.asarray(pred, dtype=np.int64).reshape(-1)
        gt = np.asarray(gt, dtype=np.int64).reshape(-1)
        if pred.shape != gt.shape:
            raise DimensionMismatchError(f'{pred.size} predictions for {gt.size} ground-truth points')
        k = int(num_classes)
        for name, values in (('prediction', pred), ('ground truth', gt)):
            if values.size and (values.min() < 0 or values.max() >= k):
                raise SchemaError(f'{name} class index outside [0, {k})')

        confusion = np.bincount(gt * k + pred, minlength=k * k).reshape(k, k)
        tp = np.diag(confusion)
        fp = confusion.sum(axis=0) - tp
        fn = confusion.sum(axis=1) - tp
        union = tp + fp + fn
        defined = union > 0
        iou = np.divide(tp, union, out=np.zeros(k), where=defined)
        miou = float(iou[defined].mean()) if defined.any() else 0.0
        accuracy = float(tp.sum() / gt.size) if gt.size else 0.0
        names = list(class_names) if class_names is not None else [str(i) for i in range(k)]
        logger.info('evaluate: N=%d K=%d mIoU=%.4f accuracy=%.4f', gt.size, k, miou, accuracy)
        return EvalReport(
            confusion=confusion,
            per_class_iou=iou,
            defined=defined,
            miou=miou,
            accuracy=accuracy,
            class_names=names,
            tpss=tpss,
        )
