from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, SchemaError
from .point_cloud import MaskSet

# Order matters: it is the checkpoint layout.
WEIGHT_FIELDS = ('pe_w1', 'pe_b1', 'pe_w2', 'pe_b2', 'wq', 'wk', 'wv', 'wo')
COORD_DIM = 3


@dataclass(frozen=True)
class SmapParams:
    """Learnable weights of masked attention pooling.

    The positional-encoding MLP maps a 3-D offset to C channels through one
    ReLU hidden layer of width H; wq, wk, wv, wo are C x C projections.
    """
    pe_w1: np.ndarray
    pe_b1: np.ndarray
    pe_w2: np.ndarray
    pe_b2: np.ndarray
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    heads: int

    def __post_init__(self):
        for name in WEIGHT_FIELDS:
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(value)):
                raise SchemaError(f'{name} has non-finite entries')
            object.__setattr__(self, name, value)
        c, h = self.dim, self.hidden
        expected = {
            'pe_w1': (COORD_DIM, h), 'pe_b1': (h,), 'pe_w2': (h, c), 'pe_b2': (c,),
            'wq': (c, c), 'wk': (c, c), 'wv': (c, c), 'wo': (c, c),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionMismatchError(f'{name} has shape {getattr(self, name).shape}, expected {shape}')
        if int(self.heads) < 1 or c % int(self.heads):
            raise SchemaError(f'heads={self.heads} must divide C={c}')
        object.__setattr__(self, 'heads', int(self.heads))

    @property
    def dim(self) -> int:
        return int(self.wq.shape[0])

    @property
    def hidden(self) -> int:
        return int(self.pe_w1.shape[1])

    def weights(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name in WEIGHT_FIELDS:
            yield name, getattr(self, name)

    def as_dict(self) -> Dict[str, np.ndarray]:
        return dict(self.weights())

    def with_weights(self, **weights) -> 'SmapParams':
        return replace(self, **weights)

    def zeros_like(self) -> 'SmapParams':
        return replace(self, **{name: np.zeros_like(value) for name, value in self.weights()})

    @classmethod
    def identity(cls, dim: int, hidden: int = 32, heads: int = 4) -> 'SmapParams':
        """Identity projections and a zero positional encoding."""
        eye = np.eye(dim)
        return cls(
            pe_w1=np.zeros((COORD_DIM, hidden)), pe_b1=np.zeros(hidden),
            pe_w2=np.zeros((hidden, dim)), pe_b2=np.zeros(dim),
            wq=eye.copy(), wk=eye.copy(), wv=eye.copy(), wo=eye.copy(),
            heads=heads,
        )

    @classmethod
    def initialize(cls, dim: int, hidden: int = 32, heads: int = 4, seed: int = 0) -> 'SmapParams':
        """Seeded Gaussian initialisation scaled by fan-in."""
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, 0x5A4D])
        scale_c = 1.0 / np.sqrt(dim)
        return cls(
            pe_w1=rng.standard_normal((COORD_DIM, hidden)) / np.sqrt(COORD_DIM),
            pe_b1=np.zeros(hidden),
            pe_w2=rng.standard_normal((hidden, dim)) * (0.1 / np.sqrt(hidden)),
            pe_b2=np.zeros(dim),
            wq=rng.standard_normal((dim, dim)) * scale_c,
            wk=rng.standard_normal((dim, dim)) * scale_c,
            wv=rng.standard_normal((dim, dim)) * scale_c,
            wo=rng.standard_normal((dim, dim)) * scale_c,
            heads=heads,
        )


@dataclass(frozen=True)
class SmapBatch:
    """One point cloud's pooling input: coordinates, features and J masks."""
    coords: np.ndarray
    features: np.ndarray
    masks: MaskSet
    targets: Optional[np.ndarray] = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        features = np.asarray(self.features, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != COORD_DIM:
            raise DimensionMismatchError(f'coords must be N x 3, got {coords.shape}')
        if features.ndim != 2 or features.shape[0] != coords.shape[0]:
            raise DimensionMismatchError(
                f'features must be N x C with N={coords.shape[0]}, got {features.shape}'
            )
        if self.masks.num_points != coords.shape[0]:
            raise DimensionMismatchError(
                f'masks cover {self.masks.num_points} points, batch has {coords.shape[0]}'
            )
        object.__setattr__(self, 'coords', coords)
        object.__setattr__(self, 'features', features)
        if self.targets is not None:
            targets = np.asarray(self.targets, dtype=np.float64)
            if targets.shape != (self.masks.count, features.shape[1]):
                raise DimensionMismatchError(
                    f'targets must be {self.masks.count} x {features.shape[1]}, got {targets.shape}'
                )
            object.__setattr__(self, 'targets', targets)

    @property
    def empty(self) -> np.ndarray:
        return self.masks.empty

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])
