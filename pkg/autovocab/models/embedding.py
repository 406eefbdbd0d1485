from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Set, Tuple

import numpy as np

from ..exceptions import EmbeddingSpaceError, EmptyInputError, SchemaError

logger = logging.getLogger(__name__)

SEPARATION_BOUND = 0.8
MAX_RESAMPLES = 1000


class RowRole(str, Enum):
    PER_POINT = 'per_point'
    PER_PIXEL = 'per_pixel'
    PER_MASK = 'per_mask'
    PER_LABEL = 'per_label'


@dataclass(frozen=True)
class FeatureMatrix:
    """R x C feature rows. ``valid`` marks rows that carry a feature
    (non-empty pixel cells, non-empty masks, points seen by a camera)."""
    values: np.ndarray
    row_role: RowRole
    valid: Optional[np.ndarray] = None
    grid: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise SchemaError(f'feature matrix must be 2-D, got shape {values.shape}')
        if not np.all(np.isfinite(values)):
            raise SchemaError('feature rows must be finite')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'row_role', RowRole(self.row_role))
        valid = np.ones(values.shape[0], dtype=bool) if self.valid is None else np.asarray(self.valid, dtype=bool)
        if valid.shape != (values.shape[0],):
            raise SchemaError('valid flags must have one entry per row')
        object.__setattr__(self, 'valid', valid)

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])


def canonical_label(label: str) -> str:
    text = ' '.join(str(label).lower().split())
    if not text:
        raise EmptyInputError('label is empty after trimming')
    return text


def _label_key(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode('utf-8')).digest()[:8], 'little')


@dataclass
class SyntheticSpace:
    """Deterministic stand-in for a shared vision-language embedding space.

    Every label owns a unit-norm anchor drawn from a Gaussian seeded by
    ``(seed, label)``; anchors whose |dot| with an existing anchor reaches the
    separation bound are redrawn from the next counter value.
    """
    dim: int = 64
    seed: int = 0
    noise_sigma: float = 0.0
    anchors: Dict[str, np.ndarray] = field(default_factory=dict)
    _synonym_bases: Dict[str, str] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if int(self.dim) < 2:
            raise SchemaError('embedding dimension must be at least 2')
        if self.noise_sigma < 0:
            raise SchemaError('noise_sigma must be non-negative')
        self.dim = int(self.dim)
        self.seed = int(self.seed)

    def _draw(self, label: str, attempt: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, _label_key(label), attempt])
        vector = rng.standard_normal(self.dim)
        return vector / np.linalg.norm(vector)

    def _exempt(self, label: str) -> Set[str]:
        related = {label}
        base = self._synonym_bases.get(label)
        if base:
            related.add(base)
        related.update(name for name, b in self._synonym_bases.items() if b == label)
        return related

    def _separated(self, label: str, vector: np.ndarray) -> bool:
        exempt = self._exempt(label)
        others = [anchor for other, anchor in self.anchors.items() if other not in exempt]
        if not others:
            return True
        return bool(np.all(np.abs(np.stack(others) @ vector) < SEPARATION_BOUND))

    def anchor(self, label: str) -> np.ndarray:
        key = canonical_label(label)
        cached = self.anchors.get(key)
        if cached is not None:
            return cached
        for attempt in range(MAX_RESAMPLES):
            vector = self._draw(key, attempt)
            if self._separated(key, vector):
                if attempt:
                    logger.debug('anchor %r accepted after %d redraws', key, attempt)
                vector.setflags(write=False)
                self.anchors[key] = vector
                return vector
        raise EmbeddingSpaceError(
            f'could not place an anchor for {key!r} in {self.dim} dimensions '
            f'with |dot| < {SEPARATION_BOUND} against {len(self.anchors)} anchors'
        )

    def add_synonym(self, label: str, base: str, delta_norm: float = 0.05) -> np.ndarray:
        """Register ``label`` as a perturbed copy of ``base``'s anchor."""
        key = canonical_label(label)
        base_key = canonical_label(base)
        base_vector = self.anchor(base_key)
        rng = np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, _label_key(key), _label_key(base_key)])
        delta = rng.standard_normal(self.dim)
        delta *= delta_norm / np.linalg.norm(delta)
        vector = base_vector + delta
        vector = vector / np.linalg.norm(vector)
        self._synonym_bases[key] = base_key
        if not self._separated(key, vector):
            raise EmbeddingSpaceError(f'synonym {key!r} collides with an anchor other than {base_key!r}')
        vector.setflags(write=False)
        self.anchors[key] = vector
        return vector
