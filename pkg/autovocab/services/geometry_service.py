from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import UsageError
from ..models import Camera, MaskKind, MaskSet, PointCloud

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


class GeometryService:
    """Coordinate transforms, pinhole projection and mask generation."""

    @staticmethod
    def to_polar(cloud: PointCloud) -> np.ndarray:
        """(rho, phi, z) per point, phi in [0, 2pi); the origin gets phi = 0."""
        x, y, z = cloud.coords[:, 0], cloud.coords[:, 1], cloud.coords[:, 2]
        rho = np.hypot(x, y)
        phi = np.arctan2(y, x)
        phi = np.where(phi < 0.0, phi + TWO_PI, phi)
        # -tiny + 2pi rounds up to 2pi
        phi = np.where(phi >= TWO_PI, 0.0, phi)
        phi = np.where(rho == 0.0, 0.0, phi)
        return np.column_stack([rho, phi, z])

    @staticmethod
    def from_polar(polar: np.ndarray) -> np.ndarray:
        polar = np.asarray(polar, dtype=np.float64)
        rho, phi, z = polar[:, 0], polar[:, 1], polar[:, 2]
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])

    @staticmethod
    def sector_masks(cloud: PointCloud, sectors: int) -> MaskSet:
        """T angular sectors; sector t holds t/T*2pi <= phi < (t+1)/T*2pi."""
        if int(sectors) < 1:
            raise UsageError(f'sector count must be positive, got {sectors}')
        sectors = int(sectors)
        phi = GeometryService.to_polar(cloud)[:, 1]
        bounds = (np.arange(sectors + 1) / sectors) * TWO_PI
        index = np.searchsorted(bounds, phi, side='right') - 1
        index = np.clip(index, 0, sectors - 1)
        masks = index[None, :] == np.arange(sectors)[:, None]
        logger.debug('sector_masks: N=%d T=%d empty=%d', cloud.size, sectors, int((~masks.any(axis=1)).sum()))
        return MaskSet(masks=masks, kind=MaskKind.SECTOR, keys=[(t,) for t in range(sectors)])

    @staticmethod
    def pillar_masks(cloud: PointCloud, side: float) -> MaskSet:
        """One mask per occupied side x side cell of the x-y plane, cells in lexicographic order."""
        if not side > 0:
            raise UsageError(f'pillar side must be positive, got {side}')
        cells = np.floor(cloud.coords[:, :2] / float(side)).astype(np.int64)
        keys, inverse = np.unique(cells, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        masks = inverse[None, :] == np.arange(keys.shape[0])[:, None]
        logger.debug('pillar_masks: N=%d side=%.3f pillars=%d', cloud.size, side, keys.shape[0])
        return MaskSet(masks=masks, kind=MaskKind.PILLAR, keys=[tuple(k) for k in keys.tolist()])

    @staticmethod
    def partition(cloud: PointCloud, strategy: str = 'sector', sectors: int = 12, side: float = 0.5) -> MaskSet:
        if strategy == MaskKind.SECTOR.value:
            return GeometryService.sector_masks(cloud, sectors)
        if strategy == MaskKind.PILLAR.value:
            return GeometryService.pillar_masks(cloud, side)
        raise UsageError(f'unknown partition strategy {strategy!r} (expected sector or pillar)')

    @staticmethod
    def project_points(coords: np.ndarray, cam: Camera) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pixel coordinates, camera-frame depth and visibility for every point."""
        coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
        cam_pts = coords @ cam.rotation.T + cam.translation
        depth = cam_pts[:, 2]
        front = depth > 0.0
        safe = np.where(front, depth, 1.0)
        pixels = cam_pts @ cam.intrinsics.T
        uv = pixels[:, :2] / safe[:, None]
        visible = (
            front
            & (uv[:, 0] >= 0.0) & (uv[:, 0] < cam.width)
            & (uv[:, 1] >= 0.0) & (uv[:, 1] < cam.height)
        )
        return uv, depth, visible

    @staticmethod
    def project_point(point: Sequence[float], cam: Camera) -> Optional[Tuple[float, float]]:
        uv, _, visible = GeometryService.project_points(np.asarray(point, dtype=np.float64)[None, :], cam)
        if not visible[0]:
            return None
        return float(uv[0, 0]), float(uv[0, 1])

    @staticmethod
    def visibility_masks(cloud: PointCloud, cams: List[Camera]) -> MaskSet:
        if not cams:
            raise UsageError('visibility masks need at least one camera')
        masks = np.stack([GeometryService.project_points(cloud.coords, cam)[2] for cam in cams])
        logger.debug('visibility_masks: N=%d K=%d visible=%s', cloud.size, len(cams), masks.sum(axis=1).tolist())
        return MaskSet(masks=masks, kind=MaskKind.VISIBILITY, keys=[(k,) for k in range(len(cams))])
