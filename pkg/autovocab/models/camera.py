from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..exceptions import SchemaError


@dataclass(frozen=True)
class Camera:
    """Pinhole camera without distortion; extrinsics map world to camera."""
    intrinsics: np.ndarray
    extrinsics: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        k = np.asarray(self.intrinsics, dtype=np.float64).reshape(3, 3)
        e = np.asarray(self.extrinsics, dtype=np.float64).reshape(4, 4)
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(e))):
            raise SchemaError('camera matrices must be finite')
        if k[2, 2] != 1.0:
            raise SchemaError('intrinsics[2][2] must be 1')
        if k[0, 0] <= 0 or k[1, 1] <= 0:
            raise SchemaError('focal lengths must be positive')
        if not np.array_equal(e[3], np.array([0.0, 0.0, 0.0, 1.0])):
            raise SchemaError('extrinsics bottom row must be (0, 0, 0, 1)')
        rotation = e[:3, :3]
        if np.max(np.abs(rotation @ rotation.T - np.eye(3))) > 1e-6:
            raise SchemaError('extrinsics rotation block must be orthonormal')
        if int(self.width) <= 0 or int(self.height) <= 0:
            raise SchemaError('camera width and height must be positive')
        object.__setattr__(self, 'intrinsics', k)
        object.__setattr__(self, 'extrinsics', e)
        object.__setattr__(self, 'width', int(self.width))
        object.__setattr__(self, 'height', int(self.height))

    @property
    def rotation(self) -> np.ndarray:
        return self.extrinsics[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.extrinsics[:3, 3]

    @classmethod
    def look_at(
        cls,
        eye: Sequence[float],
        target: Sequence[float],
        focal: float,
        width: int,
        height: int,
    ) -> 'Camera':
        """Camera at ``eye`` facing ``target``, z forward, x right, y down, world z up."""
        eye = np.asarray(eye, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - eye
        norm = np.linalg.norm(forward)
        if norm == 0:
            raise SchemaError('camera eye and target coincide')
        forward = forward / norm
        up = np.array([0.0, 0.0, 1.0])
        if abs(float(forward @ up)) > 1.0 - 1e-9:
            up = np.array([0.0, 1.0, 0.0])
        right = np.cross(forward, up)
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        rotation = np.stack([right, down, forward])

        extrinsics = np.eye(4)
        extrinsics[:3, :3] = rotation
        extrinsics[:3, 3] = -rotation @ eye
        intrinsics = np.array([
            [focal, 0.0, width / 2.0],
            [0.0, focal, height / 2.0],
            [0.0, 0.0, 1.0],
        ])
        return cls(intrinsics=intrinsics, extrinsics=extrinsics, width=width, height=height)

    def to_dict(self) -> dict:
        return {
            'intrinsics': self.intrinsics.reshape(-1).tolist(),
            'extrinsics': self.extrinsics.reshape(-1).tolist(),
            'width': self.width,
            'height': self.height,
        }
