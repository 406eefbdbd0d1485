from __future__ import annotations

import logging
from typing import Dict, List, Optional

import numpy as np

from ..exceptions import SchemaError
from ..models import Lexicon, ObjectSpec, PartOfSpeech, PointCloud, Scene, SceneSpec, Shape
from ..models.embedding import canonical_label

logger = logging.getLogger(__name__)

# Stream salt for scene sampling.
_SCENE_STREAM = 0x5343


class SceneService:
    """Synthetic scene generation from primitive descriptions."""

    @staticmethod
    def validate_object(obj: ObjectSpec) -> None:
        ex, ey, ez = (float(v) for v in obj.extent)
        if int(obj.point_count) < 1:
            raise SchemaError(f'object {obj.label!r} needs point_count >= 1')
        if not all(np.isfinite([ex, ey, ez, *obj.center])):
            raise SchemaError(f'object {obj.label!r} has non-finite geometry')
        if obj.shape == Shape.PLANE:
            if ex <= 0 or ey <= 0 or ez < 0:
                raise SchemaError(f'plane {obj.label!r} needs positive x/y extent and non-negative z extent')
        elif ex <= 0 or ey <= 0 or ez <= 0:
            raise SchemaError(f'{obj.shape.value} {obj.label!r} needs a positive extent on every axis')

    @staticmethod
    def validate_labels(spec: SceneSpec, lexicon: Lexicon) -> None:
        """Every word of every object label must be a valid lexicon noun."""
        for obj in spec.objects:
            for word in canonical_label(obj.label).split():
                entry = lexicon.get(word)
                if entry is None or entry.pos != PartOfSpeech.NOUN or not entry.valid:
                    raise SchemaError(f'object label {obj.label!r}: {word!r} is not a valid lexicon noun')

    @staticmethod
    def sample_object(obj: ObjectSpec, rng: np.random.Generator) -> np.ndarray:
        n = int(obj.point_count)
        center = np.asarray(obj.center, dtype=np.float64)
        extent = np.asarray(obj.extent, dtype=np.float64)
        if obj.shape in (Shape.BOX, Shape.PLANE):
            return center + (rng.random((n, 3)) - 0.5) * extent
        # cylinder: elliptic cross-section with semi-axes extent/2, uniform in area
        radius = np.sqrt(rng.random(n))
        theta = rng.random(n) * 2.0 * np.pi
        height = rng.random(n) - 0.5
        return center + np.column_stack([
            0.5 * extent[0] * radius * np.cos(theta),
            0.5 * extent[1] * radius * np.sin(theta),
            extent[2] * height,
        ])

    @staticmethod
    def generate_scene(spec: SceneSpec, lexicon: Optional[Lexicon] = None) -> Scene:
        """Seeded point sampling of every object; one ground-truth class per distinct label."""
        if not spec.objects:
            raise SchemaError('a scene spec needs at least one object')
        for obj in spec.objects:
            SceneService.validate_object(obj)
        if lexicon is not None:
            SceneService.validate_labels(spec, lexicon)

        rng = np.random.default_rng([int(spec.seed) & 0xFFFFFFFFFFFFFFFF, _SCENE_STREAM])
        table: Dict[str, int] = {}
        chunks: List[np.ndarray] = []
        labels: List[np.ndarray] = []
        for obj in spec.objects:
            name = canonical_label(obj.label)
            index = table.setdefault(name, len(table))
            chunks.append(SceneService.sample_object(obj, rng))
            labels.append(np.full(int(obj.point_count), index, dtype=np.int64))

        # Stored scenes hold float32 coordinates
        coords = np.concatenate(chunks).astype(np.float32).astype(np.float64)
        cloud = PointCloud(coords=coords, gt_labels=np.concatenate(labels), label_table=list(table))
        logger.info('generated scene %s: N=%d classes=%d seed=%d', spec.name, cloud.size, len(table), spec.seed)
        return Scene(
            cloud=cloud,
            cameras=list(spec.cameras),
            captions=list(spec.captions),
            name=spec.name,
            seed=int(spec.seed),
            noise_sigma=float(spec.noise_sigma),
        )
