from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from django.conf import settings

from ..exceptions import CountOverflowError, SchemaError
from ..json_renderer import render_json
from ..models import Camera, Caption, PointCloud, Scene
from ..serializers import CaptionSerializer, ManifestSerializer, camera_from_dict, load_document
from .blob import check_magic, read_bytes, read_json, read_u32, require_length, u32

logger = logging.getLogger(__name__)

POINTS_MAGIC = b'AVSP'
LABELS_MAGIC = b'AVSL'
HEADER_SIZE = 8

MANIFEST_NAME = 'scene.json'
POINTS_NAME = 'points.avsp'
LABELS_NAME = 'labels.avsl'
CAPTIONS_NAME = 'captions.jsonl'


def _max_points() -> int:
    return int(settings.AVS['MAX_POINTS'])


class SceneRepository:
    """Scene directories: a JSON manifest next to its point/label blobs and caption lines."""

    @staticmethod
    def manifest_path(path: Union[str, Path]) -> Path:
        path = Path(path)
        return path / MANIFEST_NAME if path.is_dir() else path

    # --- blobs -------------------------------------------------------------

    @staticmethod
    def _read_count(data: bytes, magic: bytes, path: Path) -> int:
        check_magic(data, magic, HEADER_SIZE, path)
        count = read_u32(data, 4)
        if count > _max_points():
            raise CountOverflowError(f'{path}: declared count {count} exceeds the maximum of {_max_points()}')
        return count

    @staticmethod
    def read_points(path: Path) -> np.ndarray:
        data = read_bytes(path, 'point blob')
        count = SceneRepository._read_count(data, POINTS_MAGIC, path)
        require_length(data, HEADER_SIZE + 12 * count, path)
        coords = np.frombuffer(data, dtype='<f4', count=3 * count, offset=HEADER_SIZE)
        return coords.reshape(count, 3).astype(np.float64)

    @staticmethod
    def write_points(coords: np.ndarray, path: Path) -> None:
        coords = np.ascontiguousarray(coords, dtype='<f4')
        Path(path).write_bytes(POINTS_MAGIC + u32(coords.shape[0]) + coords.tobytes())

    @staticmethod
    def read_labels(path: Path) -> np.ndarray:
        data = read_bytes(path, 'label blob')
        count = SceneRepository._read_count(data, LABELS_MAGIC, path)
        require_length(data, HEADER_SIZE + 4 * count, path)
        return np.frombuffer(data, dtype='<u4', count=count, offset=HEADER_SIZE).astype(np.int64)

    @staticmethod
    def write_labels(labels: np.ndarray, path: Path) -> None:
        labels = np.ascontiguousarray(labels, dtype='<u4')
        Path(path).write_bytes(LABELS_MAGIC + u32(labels.shape[0]) + labels.tobytes())

    # --- captions ------------------------------------------------------------

    @staticmethod
    def read_captions(path: Path) -> List[Caption]:
        raw = read_bytes(path, 'caption file').decode('utf-8')
        captions = []
        for number, line in enumerate(raw.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f'{path} line {number}: invalid JSON ({exc.msg})') from exc
            captions.append(load_document(CaptionSerializer, data, f'{path} line {number}'))
        return captions

    @staticmethod
    def write_captions(captions: List[Caption], path: Path) -> None:
        lines = [json.dumps(CaptionSerializer.to_line(c), ensure_ascii=False) for c in captions]
        Path(path).write_text(''.join(line + '\n' for line in lines), encoding='utf-8')

    # --- scenes --------------------------------------------------------------

    @staticmethod
    def _camera(entry, root: Path, index: int) -> Camera:
        if isinstance(entry, str):
            return camera_from_dict(read_json(root / entry, 'camera file'), f'camera file {entry}')
        return camera_from_dict(entry, f'cameras[{index}]')

    @staticmethod
    def read_scene(path: Union[str, Path]) -> Scene:
        """Load a whole scene; any malformed part fails the read."""
        manifest_path = SceneRepository.manifest_path(path)
        root = manifest_path.parent
        manifest = load_document(ManifestSerializer, read_json(manifest_path, 'scene manifest'), str(manifest_path))

        coords = SceneRepository.read_points(root / manifest['points'])
        labels = None
        if manifest['labels']:
            labels = SceneRepository.read_labels(root / manifest['labels'])
            if labels.shape[0] != coords.shape[0]:
                raise SchemaError(f'label blob holds {labels.shape[0]} labels for {coords.shape[0]} points')
        cameras = [SceneRepository._camera(entry, root, i) for i, entry in enumerate(manifest['cameras'])]
        captions = SceneRepository.read_captions(root / manifest['captions']) if manifest['captions'] else []

        cloud = PointCloud(coords=coords, gt_labels=labels, label_table=manifest['label_table'] or None)
        scene = Scene(
            cloud=cloud,
            cameras=cameras,
            captions=captions,
            name=manifest['name'],
            seed=manifest['seed'],
            noise_sigma=manifest['noise_sigma'],
        )
        logger.debug('read scene %s: N=%d K=%d captions=%d', scene.name, cloud.size, len(cameras), len(captions))
        return scene

    @staticmethod
    def write_scene(scene: Scene, directory: Union[str, Path]) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        cloud = scene.cloud
        SceneRepository.write_points(cloud.coords, directory / POINTS_NAME)
        labels_name: Optional[str] = None
        if cloud.gt_labels is not None:
            labels_name = LABELS_NAME
            SceneRepository.write_labels(cloud.gt_labels, directory / LABELS_NAME)
        captions_name: Optional[str] = None
        if scene.captions:
            captions_name = CAPTIONS_NAME
            SceneRepository.write_captions(scene.captions, directory / CAPTIONS_NAME)

        manifest = {
            'name': scene.name,
            'points': POINTS_NAME,
            'labels': labels_name,
            'label_table': list(cloud.label_table or []),
            'cameras': [cam.to_dict() for cam in scene.cameras],
            'captions': captions_name,
            'seed': scene.seed,
            'noise_sigma': scene.noise_sigma,
        }
        manifest_path = directory / MANIFEST_NAME
        manifest_path.write_bytes(render_json(manifest))
        logger.info('wrote scene %s to %s', scene.name, directory)
        return manifest_path
