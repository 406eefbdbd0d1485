from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import SchemaError
from .vocabulary import Vocabulary


@dataclass(frozen=True)
class SegmentationResult:
    labels: np.ndarray
    vocabulary: Vocabulary
    scores: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        scores = np.asarray(self.scores, dtype=np.float64)
        if labels.shape != scores.shape or labels.ndim != 1:
            raise SchemaError('labels and scores must be vectors of equal length')
        if labels.size and (labels.min() < 0 or labels.max() >= len(self.vocabulary)):
            raise SchemaError('label index outside the vocabulary')
        if not np.all(np.isfinite(scores)):
            raise SchemaError('scores must be finite')
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'scores', scores)

    def label_names(self) -> List[str]:
        return [self.vocabulary[i] for i in self.labels.tolist()]


@dataclass(frozen=True)
class VocabularyMapping:
    """Total map from auto-generated labels onto a fixed target vocabulary."""
    pairs: Tuple[Tuple[str, str, float], ...]
    targets: Vocabulary

    def __post_init__(self):
        pairs = tuple((str(a), str(t), float(s)) for a, t, s in self.pairs)
        autos = [a for a, _, _ in pairs]
        if len(set(autos)) != len(autos):
            raise SchemaError('every auto label must map to exactly one target')
        for auto, target, sim in pairs:
            if target not in self.targets:
                raise SchemaError(f'mapping target {target!r} for {auto!r} is not a target class')
            if not np.isfinite(sim):
                raise SchemaError(f'mapping similarity for {auto!r} is not finite')
        object.__setattr__(self, 'pairs', pairs)

    def as_dict(self) -> Dict[str, str]:
        return {auto: target for auto, target, _ in self.pairs}

    @classmethod
    def identity(cls, vocabulary: Vocabulary) -> 'VocabularyMapping':
        return cls(pairs=tuple((tag, tag, 1.0) for tag in vocabulary), targets=vocabulary)


@dataclass(frozen=True)
class EvalReport:
    confusion: np.ndarray
    per_class_iou: np.ndarray
    defined: np.ndarray
    miou: float
    accuracy: float
    class_names: List[str] = field(default_factory=list)
    tpss: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            'classes': list(self.class_names),
            'confusion': self.confusion.tolist(),
            'per_class_iou': [
                float(iou) if ok else None
                for iou, ok in zip(self.per_class_iou.tolist(), self.defined.tolist())
            ],
            'undefined_classes': [
                (self.class_names[i] if i < len(self.class_names) else i)
                for i in np.flatnonzero(~self.defined).tolist()
            ],
            'miou': float(self.miou),
            'accuracy': float(self.accuracy),
            'tpss': None if self.tpss is None else float(self.tpss),
        }
