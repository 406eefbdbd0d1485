from __future__ import annotations

import logging
from pathlib import Path
from typing import Union

import numpy as np

from ..exceptions import SchemaError
from ..models import SmapParams
from ..models.smap import COORD_DIM, WEIGHT_FIELDS
from .blob import check_magic, read_bytes, read_u32, require_length, u32

logger = logging.getLogger(__name__)

MAGIC = b'SMAP1'
HEADER_SIZE = len(MAGIC) + 12


def _shapes(dim: int, hidden: int):
    return {
        'pe_w1': (COORD_DIM, hidden), 'pe_b1': (hidden,), 'pe_w2': (hidden, dim), 'pe_b2': (dim,),
        'wq': (dim, dim), 'wk': (dim, dim), 'wv': (dim, dim), 'wo': (dim, dim),
    }


class CheckpointRepository:
    """SMAP weights: magic, u32 C, H and heads, then float32 arrays in field order."""

    @staticmethod
    def write(params: SmapParams, path: Union[str, Path]) -> None:
        chunks = [MAGIC, u32(params.dim), u32(params.hidden), u32(params.heads)]
        chunks.extend(np.ascontiguousarray(value, dtype='<f4').tobytes() for _, value in params.weights())
        Path(path).write_bytes(b''.join(chunks))
        logger.info('wrote SMAP checkpoint %s (C=%d H=%d heads=%d)', path, params.dim, params.hidden, params.heads)

    @staticmethod
    def read(path: Union[str, Path]) -> SmapParams:
        path = Path(path)
        data = read_bytes(path, 'SMAP checkpoint')
        check_magic(data, MAGIC, HEADER_SIZE, path)
        dim, hidden, heads = (read_u32(data, len(MAGIC) + 4 * i) for i in range(3))
        if dim < 1 or hidden < 1 or heads < 1:
            raise SchemaError(f'{path}: C, H and heads must be positive, got {dim}, {hidden}, {heads}')
        shapes = _shapes(dim, hidden)
        floats = sum(int(np.prod(shapes[name])) for name in WEIGHT_FIELDS)
        require_length(data, HEADER_SIZE + 4 * floats, path)

        weights, offset = {}, HEADER_SIZE
        for name in WEIGHT_FIELDS:
            count = int(np.prod(shapes[name]))
            values = np.frombuffer(data, dtype='<f4', count=count, offset=offset)
            weights[name] = values.reshape(shapes[name]).astype(np.float64)
            offset += 4 * count
        return SmapParams(heads=heads, **weights)
