from __future__ import annotations

import colorsys
import csv
import hashlib
import io
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from plyfile import PlyData, PlyElement

from ..exceptions import DimensionMismatchError, MissingResourceError, SchemaError
from ..json_renderer import render_json
from ..models import EvalReport, PointCloud, SegmentationResult, Vocabulary, VocabularyMapping
from .blob import read_bytes, read_json

logger = logging.getLogger(__name__)

SEGMENTATION_HEADER = ['point_index', 'label_index', 'label', 'score']
MAPPING_HEADER = ['auto_label', 'target_label', 'similarity']


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + '.json')


def label_color(label: str) -> Tuple[int, int, int]:
    """RGB from a hash of the label text, independent of vocabulary order."""
    digest = hashlib.sha256(label.encode('utf-8')).digest()
    hue = int.from_bytes(digest[:4], 'little') / 2 ** 32
    saturation = 0.55 + 0.4 * digest[4] / 255
    value = 0.75 + 0.25 * digest[5] / 255
    return tuple(int(round(255 * c)) for c in colorsys.hsv_to_rgb(hue, saturation, value))


def _read_csv(path: Path, header, what: str):
    text = read_bytes(path, what).decode('utf-8')
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or rows[0] != header:
        raise SchemaError(f'{path}: expected header {",".join(header)}')
    return rows[1:]


class ExportRepository:
    """Result files: segmentation CSV with its vocabulary sidecar, mapping CSV, report JSON and PLY."""

    @staticmethod
    def _write_csv(path: Path, header, rows) -> None:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)
        Path(path).write_text(buffer.getvalue(), encoding='utf-8')

    @staticmethod
    def write_segmentation(result: SegmentationResult, path: Union[str, Path], scene_name: str = '') -> None:
        names = result.label_names()
        rows = (
            (n, int(label), name, repr(float(score)))
            for n, (label, name, score) in enumerate(zip(result.labels.tolist(), names, result.scores.tolist()))
        )
        ExportRepository._write_csv(path, SEGMENTATION_HEADER, rows)
        sidecar = {'scene': scene_name, 'points': int(result.labels.size), 'vocabulary': list(result.vocabulary)}
        sidecar_path(path).write_bytes(render_json(sidecar))
        logger.info('wrote segmentation of %d points to %s', result.labels.size, path)

    @staticmethod
    def read_segmentation(path: Union[str, Path]) -> SegmentationResult:
        path = Path(path)
        sidecar = read_json(sidecar_path(path), 'segmentation sidecar')
        if not isinstance(sidecar, dict) or not isinstance(sidecar.get('vocabulary'), list):
            raise SchemaError(f'{sidecar_path(path)}: sidecar needs a vocabulary list')
        vocabulary = Vocabulary(tuple(sidecar['vocabulary']))
        rows = _read_csv(path, SEGMENTATION_HEADER, 'segmentation file')
        labels = np.zeros(len(rows), dtype=np.int64)
        scores = np.zeros(len(rows))
        for n, row in enumerate(rows):
            line = n + 2
            if len(row) != 4:
                raise SchemaError(f'{path} line {line}: expected 4 columns')
            try:
                index, label, score = int(row[0]), int(row[1]), float(row[3])
            except ValueError as exc:
                raise SchemaError(f'{path} line {line}: {exc}') from exc
            if index != n:
                raise SchemaError(f'{path} line {line}: point index {index}, expected {n}')
            if not 0 <= label < len(vocabulary) or vocabulary[label] != row[2]:
                raise SchemaError(f'{path} line {line}: label {row[2]!r} does not match index {label}')
            labels[n], scores[n] = label, score
        return SegmentationResult(labels=labels, vocabulary=vocabulary, scores=scores)

    @staticmethod
    def write_mapping(mapping: VocabularyMapping, path: Union[str, Path]) -> None:
        rows = ((auto, target, repr(sim)) for auto, target, sim in mapping.pairs)
        ExportRepository._write_csv(path, MAPPING_HEADER, rows)

    @staticmethod
    def read_mapping(path: Union[str, Path], targets: Vocabulary) -> VocabularyMapping:
        path = Path(path)
        pairs = []
        for n, row in enumerate(_read_csv(path, MAPPING_HEADER, 'mapping file'), start=2):
            if len(row) != 3:
                raise SchemaError(f'{path} line {n}: expected 3 columns')
            try:
                pairs.append((row[0], row[1], float(row[2])))
            except ValueError as exc:
                raise SchemaError(f'{path} line {n}: {exc}') from exc
        return VocabularyMapping(pairs=tuple(pairs), targets=targets)

    @staticmethod
    def report_document(report: EvalReport, mapping: Optional[VocabularyMapping] = None) -> Dict:
        document = report.to_dict()
        if mapping is not None:
            document['mapping'] = [
                {'auto_label': a, 'target_label': t, 'similarity': s} for a, t, s in mapping.pairs
            ]
        return document

    @staticmethod
    def write_report(report: EvalReport, path: Union[str, Path], mapping: Optional[VocabularyMapping] = None) -> None:
        Path(path).write_bytes(render_json(ExportRepository.report_document(report, mapping)))
        logger.info('wrote evaluation report to %s', path)

    @staticmethod
    def export_ply(result: SegmentationResult, cloud: PointCloud, path: Union[str, Path]) -> None:
        """ASCII PLY with one coloured vertex per point."""
        if result.labels.size != cloud.size:
            raise DimensionMismatchError(f'segmentation has {result.labels.size} labels for {cloud.size} points')
        palette = np.array([label_color(tag) for tag in result.vocabulary], dtype=np.uint8).reshape(-1, 3)
        colors = palette[result.labels]
        vertex = np.empty(cloud.size, dtype=[
            ('x', 'f4'), ('y', 'f4'), ('z', 'f4'),
            ('red', 'u1'), ('green', 'u1'), ('blue', 'u1'),
        ])
        vertex['x'], vertex['y'], vertex['z'] = cloud.coords[:, 0], cloud.coords[:, 1], cloud.coords[:, 2]
        vertex['red'], vertex['green'], vertex['blue'] = colors[:, 0], colors[:, 1], colors[:, 2]
        PlyData([PlyElement.describe(vertex, 'vertex')], text=True).write(str(path))
        logger.info('exported %d coloured points to %s', cloud.size, path)

    @staticmethod
    def read_ply(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
        """Coordinates and RGB of a PLY written by export_ply."""
        path = Path(path)
        if not path.is_file():
            raise MissingResourceError(f'PLY file not found: {path}')
        ply = PlyData.read(str(path))
        data = ply['vertex'].data
        coords = np.column_stack([data['x'], data['y'], data['z']]).astype(np.float64)
        colors = np.column_stack([data['red'], data['green'], data['blue']]).astype(np.uint8)
        return coords, colors
