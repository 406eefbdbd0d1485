from ...controllers.pipeline_controller import PipelineController
from ...exceptions import UsageError
from ...models import Vocabulary
from ...repositories.export_repository import ExportRepository
from ...repositories.lexicon_repository import LexiconRepository
from ...services.metrics_service import MetricsService
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Map auto-generated labels onto a fixed target vocabulary by text-embedding similarity'

    def add_arguments(self, parser):
        parser.add_argument('--auto', default=None, help='Auto labels file, one label per line')
        parser.add_argument('--segmentation', default=None, help='Take the auto labels from a segmentation sidecar')
        parser.add_argument('--targets', default=None, help='Target labels file')
        self.add_scene_argument(parser, required=False)
        self.add_space_arguments(parser)
        parser.add_argument('--out', default=None, help='Mapping CSV')
        self.add_output_argument(parser)

    def handle(self, *args, **options):
        if bool(options['auto']) == bool(options['segmentation']):
            raise UsageError('give exactly one of --auto or --segmentation')
        if not (options['targets'] or options['scene']):
            raise UsageError('give --targets or a --scene whose classes are the targets')
        scene = PipelineController.load_scene(options['scene']) if options['scene'] else None

        if options['auto']:
            auto = LexiconRepository.read_labels(options['auto'])
        else:
            auto = ExportRepository.read_segmentation(options['segmentation']).vocabulary
        if options['targets']:
            targets = LexiconRepository.read_labels(options['targets'])
        else:
            targets = Vocabulary.from_iterable(scene.cloud.label_table or [])

        space = PipelineController.build_space(scene, **self.space_options(options))
        mapping = MetricsService.map_vocabulary(auto, targets, space)
        if options['out']:
            ExportRepository.write_mapping(mapping, options['out'])
        self.emit({
            'targets': list(targets),
            'pairs': [{'auto_label': a, 'target_label': t, 'similarity': s} for a, t, s in mapping.pairs],
        }, options['json_out'])
