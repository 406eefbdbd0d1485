from .camera import Camera
from .embedding import FeatureMatrix, RowRole, SyntheticSpace
from .point_cloud import MaskKind, MaskSet, PointCloud
from .results import EvalReport, SegmentationResult, VocabularyMapping
from .scene import ObjectSpec, Scene, SceneSpec, Shape
from .smap import SmapBatch, SmapParams
from .vocabulary import Caption, CaptionSource, Lexicon, LexiconEntry, PartOfSpeech, Vocabulary

__all__ = [
    "Camera",
    "Caption",
    "CaptionSource",
    "EvalReport",
    "FeatureMatrix",
    "Lexicon",
    "LexiconEntry",
    "MaskKind",
    "MaskSet",
    "ObjectSpec",
    "PartOfSpeech",
    "PointCloud",
    "RowRole",
    "Scene",
    "SceneSpec",
    "SegmentationResult",
    "Shape",
    "SmapBatch",
    "SmapParams",
    "SyntheticSpace",
    "Vocabulary",
    "VocabularyMapping",
]
