from __future__ import annotations

from typing import Any, Type

from rest_framework import serializers

from .exceptions import PipelineError, SchemaError
from .models import Camera, Caption, CaptionSource, ObjectSpec, SceneSpec, Shape


def _flatten(detail: Any, prefix: str = '') -> str:
    if isinstance(detail, dict):
        return '; '.join(_flatten(v, f'{prefix}{k}.') for k, v in detail.items())
    if isinstance(detail, list):
        return '; '.join(_flatten(v, prefix) for v in detail)
    return f'{prefix.rstrip(".")}: {detail}' if prefix else str(detail)


def load_document(serializer_class: Type[serializers.Serializer], data: Any, what: str, **context):
    """Validate ``data`` and build its domain object, reporting problems as SchemaError."""
    serializer = serializer_class(data=data, context=context)
    if not serializer.is_valid():
        raise SchemaError(f'{what}: {_flatten(serializer.errors)}')
    try:
        return serializer.save()
    except PipelineError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(f'{what}: {exc}') from exc


class FloatListField(serializers.ListField):
    child = serializers.FloatField()

    def __init__(self, length: int, **kwargs):
        kwargs.setdefault('min_length', length)
        kwargs.setdefault('max_length', length)
        super().__init__(**kwargs)


class CameraSerializer(serializers.Serializer):
    """Explicit pinhole camera: row-major K (9 floats) and world-to-camera E (16 floats)."""
    intrinsics = FloatListField(9)
    extrinsics = FloatListField(16)
    width = serializers.IntegerField(min_value=1)
    height = serializers.IntegerField(min_value=1)

    def create(self, validated_data):
        return Camera(**validated_data)


class LookAtCameraSerializer(serializers.Serializer):
    eye = FloatListField(3)
    target = FloatListField(3)
    focal = serializers.FloatField(min_value=0.0)
    width = serializers.IntegerField(min_value=1)
    height = serializers.IntegerField(min_value=1)

    def create(self, validated_data):
        return Camera.look_at(**validated_data)


def camera_from_dict(data: Any, what: str = 'camera') -> Camera:
    if isinstance(data, dict) and 'eye' in data:
        return load_document(LookAtCameraSerializer, data, what)
    return load_document(CameraSerializer, data, what)


class CaptionSerializer(serializers.Serializer):
    text = serializers.CharField(trim_whitespace=False)
    source = serializers.ChoiceField(choices=[s.value for s in CaptionSource], default=CaptionSource.IMAGE.value)
    index = serializers.IntegerField(source='source_index', min_value=0, default=0)

    def create(self, validated_data):
        return Caption(**validated_data)

    @staticmethod
    def to_line(caption: Caption) -> dict:
        return {'text': caption.text, 'source': caption.source.value, 'index': caption.source_index}


class ObjectSpecSerializer(serializers.Serializer):
    label = serializers.CharField()
    shape = serializers.ChoiceField(choices=[s.value for s in Shape])
    center = FloatListField(3)
    extent = FloatListField(3)
    point_count = serializers.IntegerField(min_value=1)

    def create(self, validated_data):
        return ObjectSpec(
            label=validated_data['label'],
            shape=Shape(validated_data['shape']),
            center=tuple(validated_data['center']),
            extent=tuple(validated_data['extent']),
            point_count=validated_data['point_count'],
        )


class SceneSpecSerializer(serializers.Serializer):
    name = serializers.CharField(default='scene')
    seed = serializers.IntegerField(default=0, min_value=0)
    noise_sigma = serializers.FloatField(default=0.0, min_value=0.0)
    objects = ObjectSpecSerializer(many=True, allow_empty=False)
    # ``classes`` is accepted as an alias of ``objects``
    classes = ObjectSpecSerializer(many=True, required=False, allow_empty=False)
    cameras = serializers.ListField(child=serializers.DictField(), default=list)
    captions = CaptionSerializer(many=True, default=list)

    def to_internal_value(self, data):
        if isinstance(data, dict) and 'objects' not in data and 'classes' in data:
            data = {**data, 'objects': data['classes']}
        return super().to_internal_value(data)

    def create(self, validated_data):
        objects = [ObjectSpecSerializer().create(item) for item in validated_data['objects']]
        cameras = [camera_from_dict(item, f'cameras[{i}]') for i, item in enumerate(validated_data['cameras'])]
        captions = [CaptionSerializer().create(item) for item in validated_data['captions']]
        return SceneSpec(
            objects=objects,
            cameras=cameras,
            captions=captions,
            seed=validated_data['seed'],
            noise_sigma=validated_data['noise_sigma'],
            name=validated_data['name'],
        )


class ManifestSerializer(serializers.Serializer):
    """Scene manifest: blob paths are relative to the manifest's directory.

    Camera entries are inline camera objects or relative paths to camera JSON files.
    """
    name = serializers.CharField(default='scene')
    points = serializers.CharField()
    labels = serializers.CharField(allow_null=True, default=None)
    label_table = serializers.ListField(child=serializers.CharField(), default=list)
    cameras = serializers.ListField(child=serializers.JSONField(), default=list)
    captions = serializers.CharField(allow_null=True, default=None)
    seed = serializers.IntegerField(allow_null=True, default=None, min_value=0)
    noise_sigma = serializers.FloatField(default=0.0, min_value=0.0)

    def validate_cameras(self, value):
        for i, item in enumerate(value):
            if not isinstance(item, (dict, str)):
                raise serializers.ValidationError(f'entry {i} must be a camera object or a relative path')
        return value

    def create(self, validated_data):
        return dict(validated_data)
