from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from django.core.management.base import BaseCommand

from ..controllers.pipeline_controller import SCENE_CAPTIONS, PartitionOptions, VocabularySources
from ..json_renderer import render_json

logger = logging.getLogger(__name__)


def str_to_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise argparse.ArgumentTypeError(f'expected true or false, got {value!r}')


class PipelineCommand(BaseCommand):
    """Shared flags and output handling for the pipeline commands.

    Results are JSON documents written to ``--json-out`` or standard output;
    diagnostics go through logging to standard error.
    """
    requires_system_checks = []

    def add_bool_argument(self, parser, flag: str, default: bool, help: str) -> None:
        parser.add_argument(flag, type=str_to_bool, nargs='?', const=True, default=default, help=help)

    def add_space_arguments(self, parser) -> None:
        parser.add_argument('--dim', type=int, default=None, help='Embedding dimension C (settings AVS.EMBED_DIM)')
        parser.add_argument('--seed', type=int, default=None, help='Seed for every random draw (settings AVS.SEED)')
        parser.add_argument('--noise-sigma', type=float, default=None,
                            help='Oracle point-feature noise (defaults to the scene value)')
        parser.add_argument('--synonym', action='append', default=[], metavar='LABEL=BASE',
                            help='Register LABEL as a near copy of BASE in the embedding space')

    def add_scene_argument(self, parser, required: bool = True) -> None:
        parser.add_argument('--scene', required=required, help='Scene directory or manifest path')

    def add_partition_arguments(self, parser) -> None:
        parser.add_argument('--partition', choices=['sector', 'pillar'], default='sector',
                            help='Mask generation: polar sectors (outdoor) or x-y pillars (indoor)')
        parser.add_argument('--sectors', type=int, default=None, help='Number of sectors T (settings AVS.SECTORS)')
        parser.add_argument('--pillar-side', type=float, default=None,
                            help='Pillar cell side in meters (settings AVS.PILLAR_SIDE)')
        self.add_bool_argument(parser, '--use-pe', True, 'Add the positional encoding inside pooling')

    def add_vocabulary_arguments(self, parser) -> None:
        parser.add_argument('--labels', action='append', default=[], help='Labels file, one label per line')
        parser.add_argument('--captions', nargs='?', const=SCENE_CAPTIONS, default=None,
                            help='Parse image captions; a JSONL path, or the scene captions when no path is given')
        self.add_bool_argument(parser, '--use-point-captioner', False, 'Add tags decoded from pooled point features')
        parser.add_argument('--checkpoint', default=None, help='SMAP checkpoint for the point captioner')
        self.add_bool_argument(parser, '--vocab-from-gt', False, 'Add the scene ground-truth class names')
        parser.add_argument('--k-decode', type=int, default=None, help='Tags decoded per mask (settings AVS.K_DECODE)')
        parser.add_argument('--lexicon', default=None, help='Lexicon TSV (settings AVS.LEXICON_PATH)')

    def add_output_argument(self, parser) -> None:
        parser.add_argument('--json-out', default=None, help='Write the JSON result here instead of standard output')

    @staticmethod
    def space_options(options: Dict[str, Any]) -> Dict[str, Any]:
        return {
            'dim': options.get('dim'),
            'seed': options.get('seed'),
            'noise_sigma': options.get('noise_sigma'),
            'synonyms': options.get('synonym') or (),
        }

    @staticmethod
    def partition_options(options: Dict[str, Any]) -> PartitionOptions:
        return PartitionOptions(
            strategy=options.get('partition', 'sector'),
            sectors=options.get('sectors'),
            pillar_side=options.get('pillar_side'),
            use_pe=options.get('use_pe', True),
        )

    @staticmethod
    def vocabulary_sources(options: Dict[str, Any]) -> VocabularySources:
        return VocabularySources(
            labels=options.get('labels') or [],
            captions=options.get('captions'),
            use_point_captioner=options.get('use_point_captioner', False),
            checkpoint=options.get('checkpoint'),
            from_gt=options.get('vocab_from_gt', False),
        )

    def emit(self, document: Dict[str, Any], path: Optional[str] = None) -> None:
        payload = render_json(document)
        if path:
            Path(path).write_bytes(payload)
            logger.info('wrote %s', path)
        else:
            self.stdout.write(payload.decode('utf-8'), ending='')
