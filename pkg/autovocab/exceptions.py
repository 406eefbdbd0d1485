"""Typed pipeline errors.

Built on DRF's APIException so every error carries a ``detail`` message and a
machine-readable ``code``; the command line prints ``<code>: <detail>`` and maps
the class to an exit status.
"""
from __future__ import annotations

from rest_framework.exceptions import APIException


class PipelineError(APIException):
    status_code = 500
    default_detail = 'Pipeline failure.'
    default_code = 'pipeline_error'
    exit_code = 2

    def __init__(self, detail=None, code=None):
        super().__init__(detail=detail, code=code or self.default_code)

    @property
    def code(self) -> str:
        return getattr(self.detail, 'code', None) or self.default_code

    def __str__(self) -> str:
        return f'{self.code}: {self.detail}'


class UsageError(PipelineError, ValueError):
    status_code = 400
    default_detail = 'Invalid invocation.'
    default_code = 'usage_error'
    exit_code = 1


class DataError(PipelineError, ValueError):
    status_code = 422
    default_detail = 'Invalid input data.'
    default_code = 'data_error'


class MissingResourceError(DataError):
    status_code = 404
    default_detail = 'Missing resource.'
    default_code = 'missing_resource'


class SchemaError(DataError):
    default_detail = 'Document does not match its schema.'
    default_code = 'schema_violation'


class MagicMismatchError(DataError):
    default_detail = 'File magic does not match.'
    default_code = 'magic_mismatch'


class TruncatedPayloadError(DataError):
    default_detail = 'Truncated payload.'
    default_code = 'truncated_payload'


class CountOverflowError(DataError):
    default_detail = 'Declared element count exceeds the supported maximum.'
    default_code = 'count_overflow'


class EmptyInputError(DataError):
    default_detail = 'Input is empty.'
    default_code = 'empty_input'


class DimensionMismatchError(DataError):
    default_detail = 'Dimensions do not match.'
    default_code = 'dimension_mismatch'


class EmbeddingSpaceError(DataError):
    default_detail = 'Embedding space cannot satisfy its separation bound.'
    default_code = 'embedding_space'
