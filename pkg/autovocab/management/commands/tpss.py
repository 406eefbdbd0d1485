from ...controllers.pipeline_controller import PipelineController, avs
from ...exceptions import UsageError
from ...models import Vocabulary
from ...repositories.lexicon_repository import LexiconRepository
from ...services.metrics_service import MetricsService
from ...services.segmenter_service import SegmenterService, SegmentOptions
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Text-point semantic similarity of one or more label sets on a scene'

    def add_arguments(self, parser):
        self.add_scene_argument(parser)
        self.add_space_arguments(parser)
        parser.add_argument('--labels', action='append', default=[],
                            help='Labels file, one label per line; repeat to compare label sets')
        self.add_bool_argument(parser, '--vocab-from-gt', False, 'Also score the ground-truth class names')
        parser.add_argument('--feature-source', choices=['oracle', 'smap'], default='oracle')
        parser.add_argument('--checkpoint', default=None, help='SMAP checkpoint for --feature-source smap')
        self.add_partition_arguments(parser)
        parser.add_argument('--scale', type=float, default=None, help='Report scale (settings AVS.TPSS_SCALE)')
        self.add_output_argument(parser)

    def handle(self, *args, **options):
        label_sets = {path: LexiconRepository.read_labels(path) for path in options['labels']}
        scene = PipelineController.load_scene(options['scene'])
        if options['vocab_from_gt']:
            label_sets['ground_truth'] = Vocabulary.from_iterable(scene.cloud.gt_names())
        if not label_sets:
            raise UsageError('give at least one --labels file or --vocab-from-gt')

        space = PipelineController.build_space(scene, **self.space_options(options))
        partition = self.partition_options(options)
        params = None
        if options['feature_source'] == 'smap':
            params = PipelineController.load_params(options['checkpoint'], space)
        features = SegmenterService.point_features(scene, space, SegmentOptions(
            feature_source=options['feature_source'],
            params=params,
            partition=partition.strategy,
            sectors=avs('SECTORS', partition.sectors),
            pillar_side=avs('PILLAR_SIDE', partition.pillar_side),
            use_pe=partition.use_pe,
        ))
        scores = MetricsService.compare_label_sets(features, label_sets, space, avs('TPSS_SCALE', options['scale']))
        first = next(iter(scores.values()))
        self.emit({
            'scene': scene.name,
            'tpss': first,
            'label_sets': [
                {'name': name, 'labels': list(label_sets[name]), 'tpss': score} for name, score in scores.items()
            ],
        }, options['json_out'])
