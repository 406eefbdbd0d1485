from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from django.conf import settings

from ..exceptions import SchemaError, UsageError
from ..models import Caption, Lexicon, Scene, SmapBatch, SmapParams, SyntheticSpace, Vocabulary
from ..repositories.checkpoint_repository import CheckpointRepository
from ..repositories.lexicon_repository import LexiconRepository
from ..repositories.scene_repository import SceneRepository
from ..services.captioning_service import CaptioningService
from ..services.embedding_service import EmbeddingService
from ..services.geometry_service import GeometryService
from ..services.training_service import TrainingService

logger = logging.getLogger(__name__)

# ``--captions`` given without a path: use the captions stored with the scene
SCENE_CAPTIONS = '@scene'


def avs(key: str, value: Any = None) -> Any:
    """Flag value when given, the configured default otherwise."""
    return settings.AVS[key] if value is None else value


@dataclass
class VocabularySources:
    labels: Sequence[str] = field(default_factory=list)
    captions: Optional[str] = None
    use_point_captioner: bool = False
    checkpoint: Optional[str] = None
    from_gt: bool = False


@dataclass
class PartitionOptions:
    strategy: str = 'sector'
    sectors: Optional[int] = None
    pillar_side: Optional[float] = None
    use_pe: bool = True


class PipelineController:
    """Composition of repositories and services shared by the management commands."""

    @staticmethod
    def parse_synonyms(values: Sequence[str]) -> List[Tuple[str, str]]:
        pairs = []
        for value in values or ():
            label, sep, base = value.partition('=')
            if not sep or not label.strip() or not base.strip():
                raise UsageError(f'synonym must look like label=base, got {value!r}')
            pairs.append((label.strip(), base.strip()))
        return pairs

    @staticmethod
    def build_space(
        scene: Optional[Scene] = None,
        dim: Optional[int] = None,
        seed: Optional[int] = None,
        noise_sigma: Optional[float] = None,
        synonyms: Sequence[str] = (),
        lexicon: Optional[Lexicon] = None,
    ) -> SyntheticSpace:
        """Embedding space with anchors placed in a fixed order: the lexicon's
        nouns sorted, then the scene's classes sorted, then any synonyms.

        An anchor then does not depend on which labels a command encodes later.
        The scene's own noise level applies unless one is given explicitly.
        """
        if noise_sigma is None:
            noise_sigma = scene.noise_sigma if scene is not None else settings.AVS['NOISE_SIGMA']
        space = SyntheticSpace(dim=avs('EMBED_DIM', dim), seed=avs('SEED', seed), noise_sigma=noise_sigma)
        if lexicon is None:
            lexicon = LexiconRepository.load()
        for noun in lexicon.nouns():
            space.anchor(noun)
        if scene is not None and scene.cloud.label_table:
            for name in sorted(scene.cloud.label_table):
                space.anchor(name)
        for label, base in PipelineController.parse_synonyms(synonyms):
            space.add_synonym(label, base)
        return space

    @staticmethod
    def load_scene(path: str) -> Scene:
        return SceneRepository.read_scene(path)

    @staticmethod
    def load_lexicon(path: Optional[str] = None) -> Lexicon:
        return LexiconRepository.load(path)

    @staticmethod
    def load_params(checkpoint: Optional[str], space: SyntheticSpace) -> SmapParams:
        """Checkpoint weights, or untrained identity pooling when no checkpoint is given."""
        if not checkpoint:
            return SmapParams.identity(space.dim, hidden=settings.AVS['PE_HIDDEN'], heads=settings.AVS['HEADS'])
        params = CheckpointRepository.read(checkpoint)
        if params.dim != space.dim:
            raise SchemaError(f'checkpoint has C={params.dim}, embedding space has C={space.dim}')
        return params

    @staticmethod
    def scene_captions(scene: Scene, captions: Optional[str]) -> List[Caption]:
        if captions is None:
            return []
        if captions == SCENE_CAPTIONS:
            return list(scene.captions)
        return SceneRepository.read_captions(Path(captions))

    @staticmethod
    def point_captions(
        scene: Scene,
        space: SyntheticSpace,
        lexicon: Lexicon,
        params: SmapParams,
        partition: PartitionOptions,
        k: Optional[int] = None,
    ) -> List[Caption]:
        """Pool oracle point features per partition mask and decode each into a caption."""
        masks = GeometryService.partition(
            scene.cloud, partition.strategy, avs('SECTORS', partition.sectors), avs('PILLAR_SIDE', partition.pillar_side),
        )
        features = EmbeddingService.encode_points_oracle(space, scene.cloud)
        batch = SmapBatch(coords=scene.cloud.coords, features=features.values, masks=masks)
        return CaptioningService.caption_point_cloud(
            batch, params, space, lexicon, avs('K_DECODE', k), use_pe=partition.use_pe,
        )

    @staticmethod
    def collect_vocabulary(
        scene: Scene,
        space: SyntheticSpace,
        sources: VocabularySources,
        partition: Optional[PartitionOptions] = None,
        lexicon: Optional[Lexicon] = None,
        k: Optional[int] = None,
    ) -> Vocabulary:
        """Union of the requested sources in a fixed order: labels files, image
        captions, point captions, ground-truth class names."""
        if not (sources.labels or sources.captions or sources.use_point_captioner or sources.from_gt):
            raise UsageError('choose a vocabulary source: --labels, --captions, --use-point-captioner or --vocab-from-gt')
        parts: List[Vocabulary] = [LexiconRepository.read_labels(path) for path in sources.labels]
        needs_lexicon = sources.captions is not None or sources.use_point_captioner
        if needs_lexicon and lexicon is None:
            lexicon = PipelineController.load_lexicon()
        allow_compound = settings.AVS['ALLOW_COMPOUND']
        if sources.captions is not None:
            captions = PipelineController.scene_captions(scene, sources.captions)
            parts.append(CaptioningService.captions_to_vocabulary(captions, lexicon, allow_compound))
        if sources.use_point_captioner:
            params = PipelineController.load_params(sources.checkpoint, space)
            captions = PipelineController.point_captions(
                scene, space, lexicon, params, partition or PartitionOptions(), k,
            )
            parts.append(CaptioningService.captions_to_vocabulary(captions, lexicon, allow_compound))
        if sources.from_gt:
            if not scene.cloud.has_ground_truth:
                raise SchemaError('--vocab-from-gt needs a scene with ground-truth labels')
            parts.append(Vocabulary.from_iterable(scene.cloud.gt_names()))
        vocab = CaptioningService.merge_vocabularies(parts)
        vocab.require_non_empty()
        logger.info('vocabulary of %d labels: %s', len(vocab), ', '.join(vocab))
        return vocab

    @staticmethod
    def training_dataset(scenes: Sequence[Scene], space: SyntheticSpace) -> List[SmapBatch]:
        """One distillation batch per scene: camera visibility masks against
        mean class-anchor targets."""
        dataset = []
        for scene in scenes:
            if not scene.cameras:
                raise SchemaError(f'scene {scene.name} has no cameras to distil from')
            features = EmbeddingService.encode_points_oracle(space, scene.cloud)
            dataset.append(TrainingService.build_distillation_batch(scene.cloud, features.values, scene.cameras, space))
        return dataset

    @staticmethod
    def describe_params(params: SmapParams) -> Dict[str, int]:
        return {'dim': params.dim, 'hidden': params.hidden, 'heads': params.heads}
