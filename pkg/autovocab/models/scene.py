from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from ..exceptions import SchemaError
from .camera import Camera
from .point_cloud import PointCloud
from .vocabulary import Caption, CaptionSource


class Shape(str, Enum):
    BOX = 'box'
    PLANE = 'plane'
    CYLINDER = 'cylinder'


@dataclass(frozen=True)
class Scene:
    """Point cloud plus the cameras and image captions observed with it."""
    cloud: PointCloud
    cameras: List[Camera] = field(default_factory=list)
    captions: List[Caption] = field(default_factory=list)
    name: str = 'scene'
    seed: Optional[int] = None
    noise_sigma: float = 0.0

    def __post_init__(self):
        for caption in self.captions:
            if caption.source == CaptionSource.IMAGE and not 0 <= caption.source_index < len(self.cameras):
                raise SchemaError(
                    f'image caption index {caption.source_index} has no camera '
                    f'(scene has {len(self.cameras)})'
                )


@dataclass(frozen=True)
class ObjectSpec:
    label: str
    shape: Shape
    center: Tuple[float, float, float]
    extent: Tuple[float, float, float]
    point_count: int


@dataclass(frozen=True)
class SceneSpec:
    objects: List[ObjectSpec]
    cameras: List[Camera] = field(default_factory=list)
    captions: List[Caption] = field(default_factory=list)
    seed: int = 0
    noise_sigma: float = 0.0
    name: str = 'scene'
