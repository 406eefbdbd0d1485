from ...controllers.pipeline_controller import PipelineController, avs
from ...exceptions import SchemaError
from ...models import Vocabulary
from ...repositories.export_repository import ExportRepository
from ...services.embedding_service import EmbeddingService
from ...services.metrics_service import MetricsService
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Score a segmentation against scene ground truth after mapping its labels onto the scene classes'

    def add_arguments(self, parser):
        self.add_scene_argument(parser)
        self.add_space_arguments(parser)
        parser.add_argument('--segmentation', required=True, help='Segmentation CSV written by segment')
        parser.add_argument('--mapping', default=None,
                            help='Mapping CSV; when omitted labels are mapped by text-embedding similarity')
        self.add_bool_argument(parser, '--with-tpss', True, 'Include the TPSS of the segmentation vocabulary')
        parser.add_argument('--scale', type=float, default=None, help='TPSS report scale (settings AVS.TPSS_SCALE)')
        parser.add_argument('--out', default=None, help='Report JSON (standard output when omitted)')

    def handle(self, *args, **options):
        scene = PipelineController.load_scene(options['scene'])
        if not scene.cloud.has_ground_truth:
            raise SchemaError(f'scene {scene.name} has no ground-truth labels to evaluate against')
        result = ExportRepository.read_segmentation(options['segmentation'])
        if result.labels.size != scene.cloud.size:
            raise SchemaError(f'segmentation has {result.labels.size} points, scene has {scene.cloud.size}')

        space = PipelineController.build_space(scene, **self.space_options(options))
        targets = Vocabulary(tuple(scene.cloud.label_table))
        if options['mapping']:
            mapping = ExportRepository.read_mapping(options['mapping'], targets)
        else:
            mapping = MetricsService.map_vocabulary(result.vocabulary, targets, space)
        predictions = MetricsService.remap_predictions(result, mapping)

        tpss = None
        if options['with_tpss']:
            features = EmbeddingService.encode_points_oracle(space, scene.cloud)
            tpss = MetricsService.tpss(features, result.vocabulary, space, avs('TPSS_SCALE', options['scale']))
        report = MetricsService.evaluate(predictions, scene.cloud.gt_labels, len(targets), list(targets), tpss)
        if options['out']:
            ExportRepository.write_report(report, options['out'], mapping)
        else:
            self.emit(ExportRepository.report_document(report, mapping))
