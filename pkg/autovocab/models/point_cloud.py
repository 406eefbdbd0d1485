from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from ..exceptions import DimensionMismatchError, SchemaError


class MaskKind(str, Enum):
    VISIBILITY = 'visibility'
    SECTOR = 'sector'
    PILLAR = 'pillar'


@dataclass(frozen=True)
class PointCloud:
    """N points in a Cartesian frame (meters), optionally annotated.

    ``gt_labels[n]`` indexes ``label_table``.
    """
    coords: np.ndarray
    gt_labels: Optional[np.ndarray] = None
    label_table: Optional[List[str]] = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise DimensionMismatchError(f'coords must be N x 3, got shape {coords.shape}')
        if coords.shape[0] < 1:
            raise SchemaError('a point cloud needs at least one point')
        if not np.all(np.isfinite(coords)):
            raise SchemaError('point coordinates must be finite')
        object.__setattr__(self, 'coords', coords)

        if self.gt_labels is not None:
            labels = np.asarray(self.gt_labels)
            if labels.shape != (coords.shape[0],):
                raise DimensionMismatchError(
                    f'gt_labels must have length {coords.shape[0]}, got shape {labels.shape}'
                )
            if labels.size and (labels.min() < 0):
                raise SchemaError('gt_labels must be non-negative')
            table = list(self.label_table or [])
            if labels.size and int(labels.max()) >= len(table):
                raise SchemaError(
                    f'gt label index {int(labels.max())} outside label table of size {len(table)}'
                )
            object.__setattr__(self, 'gt_labels', labels.astype(np.int64))
            object.__setattr__(self, 'label_table', table)
        elif self.label_table is not None:
            object.__setattr__(self, 'label_table', list(self.label_table))

    @property
    def size(self) -> int:
        return int(self.coords.shape[0])

    @property
    def has_ground_truth(self) -> bool:
        return self.gt_labels is not None and bool(self.label_table)

    def gt_names(self) -> List[str]:
        """Label names in table order, restricted to classes that occur."""
        if not self.has_ground_truth:
            return []
        present = set(np.unique(self.gt_labels).tolist())
        return [name for i, name in enumerate(self.label_table) if i in present]


@dataclass(frozen=True)
class MaskSet:
    """J x N boolean membership matrix over one point cloud."""
    masks: np.ndarray
    kind: MaskKind
    keys: List[tuple] = field(default_factory=list)

    def __post_init__(self):
        masks = np.asarray(self.masks, dtype=bool)
        if masks.ndim != 2:
            raise DimensionMismatchError(f'masks must be J x N, got shape {masks.shape}')
        object.__setattr__(self, 'masks', masks)
        object.__setattr__(self, 'kind', MaskKind(self.kind))

    @property
    def count(self) -> int:
        return int(self.masks.shape[0])

    @property
    def num_points(self) -> int:
        return int(self.masks.shape[1])

    @property
    def empty(self) -> np.ndarray:
        return ~self.masks.any(axis=1)

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.masks[j])

    def assignment(self) -> np.ndarray:
        """Mask index per point for partitions (-1 where a point has no mask)."""
        hit = self.masks.any(axis=0)
        index = np.argmax(self.masks, axis=0)
        return np.where(hit, index, -1)
