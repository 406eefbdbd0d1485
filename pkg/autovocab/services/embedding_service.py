from __future__ import annotations

import logging
from typing import Iterable, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, SchemaError
from ..models import Camera, FeatureMatrix, PointCloud, RowRole, SyntheticSpace
from .geometry_service import GeometryService

logger = logging.getLogger(__name__)

# Noise stream salt, keeps point noise independent from anchor draws.
_NOISE_STREAM = 0x6E6F697365


def l2_normalize(values: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(values, axis=-1, keepdims=True)
    return np.divide(values, norms, out=np.zeros_like(values), where=norms > 0)


class EmbeddingService:
    """Encoders of the synthetic embedding space and the similarity primitive."""

    @staticmethod
    def encode_text(space: SyntheticSpace, label: str) -> np.ndarray:
        return space.anchor(label)

    @staticmethod
    def encode_texts(space: SyntheticSpace, labels: Iterable[str]) -> FeatureMatrix:
        rows = [space.anchor(label) for label in labels]
        values = np.stack(rows) if rows else np.zeros((0, space.dim))
        return FeatureMatrix(values=values, row_role=RowRole.PER_LABEL)

    @staticmethod
    def _require_ground_truth(cloud: PointCloud) -> None:
        if not cloud.has_ground_truth:
            raise SchemaError('oracle encoders need a cloud with gt_labels and label_table')

    @staticmethod
    def class_anchors(space: SyntheticSpace, cloud: PointCloud) -> np.ndarray:
        """Anchor per point (noise free), from the point's ground-truth class."""
        EmbeddingService._require_ground_truth(cloud)
        table = np.stack([space.anchor(name) for name in cloud.label_table])
        return table[cloud.gt_labels]

    @staticmethod
    def encode_points_oracle(space: SyntheticSpace, cloud: PointCloud) -> FeatureMatrix:
        """Class anchor plus seeded Gaussian noise, L2-normalised per row.

        Noise comes from one Philox stream keyed by the space seed, drawn as an
        N x C block so the result is independent of evaluation order.
        """
        anchors = EmbeddingService.class_anchors(space, cloud)
        if space.noise_sigma > 0:
            bit_gen = np.random.Philox(key=((space.seed & 0xFFFFFFFFFFFFFFFF) << 64) | _NOISE_STREAM)
            noise = np.random.Generator(bit_gen).standard_normal(anchors.shape)
            values = l2_normalize(anchors + space.noise_sigma * noise)
        else:
            values = anchors.copy()
        logger.debug('encode_points_oracle: N=%d C=%d sigma=%.3f', cloud.size, space.dim, space.noise_sigma)
        return FeatureMatrix(values=values, row_role=RowRole.PER_POINT)

    @staticmethod
    def _cells(uv: np.ndarray, cam: Camera, grid: Tuple[int, int]) -> np.ndarray:
        grid_h, grid_w = grid
        col = np.floor(uv[:, 0] * grid_w / cam.width).astype(np.int64)
        row = np.floor(uv[:, 1] * grid_h / cam.height).astype(np.int64)
        col = np.clip(col, 0, grid_w - 1)
        row = np.clip(row, 0, grid_h - 1)
        return row * grid_w + col

    @staticmethod
    def render_image_features(
        space: SyntheticSpace,
        cloud: PointCloud,
        cam: Camera,
        grid: Tuple[int, int],
    ) -> FeatureMatrix:
        """Per-pixel feature grid: each visible point splats its class anchor,
        the nearest point (smallest depth) wins a cell."""
        grid_h, grid_w = int(grid[0]), int(grid[1])
        if grid_h < 1 or grid_w < 1:
            raise SchemaError(f'feature grid must be positive, got {grid}')
        anchors = EmbeddingService.class_anchors(space, cloud)
        uv, depth, visible = GeometryService.project_points(cloud.coords, cam)
        values = np.zeros((grid_h * grid_w, space.dim))
        filled = np.zeros(grid_h * grid_w, dtype=bool)

        idx = np.flatnonzero(visible)
        if idx.size:
            cells = EmbeddingService._cells(uv[idx], cam, (grid_h, grid_w))
            # Stable sort by (cell, depth, point index): first per cell is the winner
            order = np.lexsort((idx, depth[idx], cells))
            cells_sorted = cells[order]
            first = np.ones(order.size, dtype=bool)
            first[1:] = cells_sorted[1:] != cells_sorted[:-1]
            winners = idx[order[first]]
            values[cells_sorted[first]] = anchors[winners]
            filled[cells_sorted[first]] = True
        logger.debug('render_image_features: %dx%d grid, %d cells filled', grid_h, grid_w, int(filled.sum()))
        return FeatureMatrix(values=values, row_role=RowRole.PER_PIXEL, valid=filled, grid=(grid_h, grid_w))

    @staticmethod
    def lift_to_points(pixel_features: FeatureMatrix, cloud: PointCloud, cam: Camera) -> Tuple[FeatureMatrix, np.ndarray]:
        """Copy each visible point's pixel-cell feature to the point."""
        if pixel_features.grid is None:
            raise SchemaError('pixel features carry no grid shape')
        grid_h, grid_w = pixel_features.grid
        if pixel_features.rows != grid_h * grid_w:
            raise DimensionMismatchError(
                f'grid {grid_h}x{grid_w} does not match {pixel_features.rows} feature rows'
            )
        uv, _, visible = GeometryService.project_points(cloud.coords, cam)
        values = np.zeros((cloud.size, pixel_features.dim))
        has_feature = np.zeros(cloud.size, dtype=bool)
        idx = np.flatnonzero(visible)
        if idx.size:
            cells = EmbeddingService._cells(uv[idx], cam, (grid_h, grid_w))
            hit = pixel_features.valid[cells]
            values[idx[hit]] = pixel_features.values[cells[hit]]
            has_feature[idx[hit]] = True
        return FeatureMatrix(values=values, row_role=RowRole.PER_POINT, valid=has_feature), has_feature

    @staticmethod
    def lift_from_cameras(
        space: SyntheticSpace,
        cloud: PointCloud,
        cams: Sequence[Camera],
        grid: Tuple[int, int] = None,
    ) -> Tuple[FeatureMatrix, np.ndarray]:
        """Lift from every camera; a point seen by several takes the camera with
        the smallest camera-frame depth (lowest camera index on ties)."""
        values = np.zeros((cloud.size, space.dim))
        has_feature = np.zeros(cloud.size, dtype=bool)
        best_depth = np.full(cloud.size, np.inf)
        for cam in cams:
            cam_grid = grid or (cam.height, cam.width)
            pixels = EmbeddingService.render_image_features(space, cloud, cam, cam_grid)
            lifted, flags = EmbeddingService.lift_to_points(pixels, cloud, cam)
            _, depth, _ = GeometryService.project_points(cloud.coords, cam)
            closer = flags & (depth < best_depth)
            values[closer] = lifted.values[closer]
            best_depth[closer] = depth[closer]
            has_feature |= flags
        return FeatureMatrix(values=values, row_role=RowRole.PER_POINT, valid=has_feature), has_feature

    @staticmethod
    def similarity(a: np.ndarray, b: np.ndarray) -> float:
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise DimensionMismatchError(f'similarity of vectors with shapes {a.shape} and {b.shape}')
        return float(np.dot(a, b))

    @staticmethod
    def similarity_matrix(rows: np.ndarray, labels: np.ndarray) -> np.ndarray:
        if rows.shape[-1] != labels.shape[-1]:
            raise DimensionMismatchError(
                f'feature dim {rows.shape[-1]} does not match label dim {labels.shape[-1]}'
            )
        return rows @ labels.T
