from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, EmptyInputError, UsageError
from ..models import FeatureMatrix, RowRole, Scene, SegmentationResult, SmapBatch, SmapParams, SyntheticSpace, Vocabulary
from .embedding_service import EmbeddingService
from .geometry_service import GeometryService
from .smap_service import SmapService

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 65536
FEATURE_SOURCES = ('oracle', 'smap')


@dataclass(frozen=True)
class SegmentOptions:
    use_image: bool = True
    feature_source: str = 'oracle'
    params: Optional[SmapParams] = None
    partition: str = 'sector'
    sectors: int = 12
    pillar_side: float = 0.5
    use_pe: bool = True
    grid: Optional[Tuple[int, int]] = None
    chunk: int = DEFAULT_CHUNK


class SegmenterService:

    @staticmethod
    def assign_labels(
        point_feats: FeatureMatrix,
        image_feats: Optional[Tuple[FeatureMatrix, np.ndarray]],
        text_embs: FeatureMatrix,
        vocab: Vocabulary,
        chunk: int = DEFAULT_CHUNK,
    ) -> SegmentationResult:
        """Label each point with the most similar vocabulary entry.

        Where a point carries a lifted image feature the per-label score is the
        larger of the point and image similarities. Ties go to the lowest index.
        """
        if len(vocab) == 0:
            raise EmptyInputError('cannot assign labels from an empty vocabulary')
        if text_embs.rows != len(vocab):
            raise DimensionMismatchError(f'{text_embs.rows} text embeddings for {len(vocab)} labels')
        points = point_feats.values
        image_values, has_image = None, None
        if image_feats is not None:
            image_values = image_feats[0].values
            has_image = np.asarray(image_feats[1], dtype=bool)
            if image_values.shape != points.shape or has_image.shape != (points.shape[0],):
                raise DimensionMismatchError('image features must align with point features')

        n = points.shape[0]
        labels = np.zeros(n, dtype=np.int64)
        scores = np.zeros(n)
        chunk = max(int(chunk), 1)
        for start in range(0, n, chunk):
            stop = min(start + chunk, n)
            sims = EmbeddingService.similarity_matrix(points[start:stop], text_embs.values)
            if image_values is not None:
                image_sims = EmbeddingService.similarity_matrix(image_values[start:stop], text_embs.values)
                sims = np.where(has_image[start:stop, None], np.maximum(sims, image_sims), sims)
            best = np.argmax(sims, axis=1)
            labels[start:stop] = best
            scores[start:stop] = sims[np.arange(stop - start), best]
        logger.debug('assign_labels: N=%d M=%d image=%s', n, len(vocab), image_values is not None)
        return SegmentationResult(labels=labels, vocabulary=vocab, scores=scores)

    @staticmethod
    def point_features(scene: Scene, space: SyntheticSpace, options: SegmentOptions) -> FeatureMatrix:
        """Per-point features from the oracle encoder, optionally pooled per partition mask."""
        if options.feature_source not in FEATURE_SOURCES:
            raise UsageError(f'unknown feature source {options.feature_source!r} (expected oracle or smap)')
        oracle = EmbeddingService.encode_points_oracle(space, scene.cloud)
        if options.feature_source == 'oracle':
            return oracle

        params = options.params or SmapParams.identity(space.dim)
        masks = GeometryService.partition(scene.cloud, options.partition, options.sectors, options.pillar_side)
        batch = SmapBatch(coords=scene.cloud.coords, features=oracle.values, masks=masks)
        pooled, _ = SmapService.smap_forward(batch, params, use_pe=options.use_pe)
        # a partition covers every point exactly once
        return FeatureMatrix(values=pooled[masks.assignment()], row_role=RowRole.PER_POINT)

    @staticmethod
    def segment_scene(
        scene: Scene,
        vocab: Vocabulary,
        space: SyntheticSpace,
        options: Optional[SegmentOptions] = None,
    ) -> SegmentationResult:
        options = options or SegmentOptions()
        vocab.require_non_empty()
        text_embs = EmbeddingService.encode_texts(space, vocab)
        point_feats = SegmenterService.point_features(scene, space, options)
        image_feats = None
        if options.use_image and scene.cameras:
            image_feats = EmbeddingService.lift_from_cameras(space, scene.cloud, scene.cameras, options.grid)
        logger.info(
            'segmenting %s: N=%d M=%d source=%s image=%s',
            scene.name, scene.cloud.size, len(vocab), options.feature_source, image_feats is not None,
        )
        return SegmenterService.assign_labels(point_feats, image_feats, text_embs, vocab, chunk=options.chunk)
