from enum import Enum

import numpy as np
from rest_framework.renderers import JSONRenderer
from rest_framework.utils import encoders


class NumpyJSONEncoder(encoders.JSONEncoder):
    """JSON encoder that handles numpy scalars and arrays and enum members."""

    def default(self, obj):
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Enum):
            return obj.value
        return super().default(obj)


class PipelineJSONRenderer(JSONRenderer):
    """Indented JSON for documents written to files and standard output."""
    encoder_class = NumpyJSONEncoder

    def render(self, data, accepted_media_type=None, renderer_context=None):
        renderer_context = {'indent': 2, **(renderer_context or {})}
        return super().render(data, accepted_media_type, renderer_context)


def render_json(data) -> bytes:
    return PipelineJSONRenderer().render(data) + b'\n'
