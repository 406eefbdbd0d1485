from ...controllers.pipeline_controller import PipelineController
from ...repositories.export_repository import ExportRepository, label_color
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Export a segmentation as an ASCII PLY coloured by label'

    def add_arguments(self, parser):
        self.add_scene_argument(parser)
        parser.add_argument('--segmentation', required=True, help='Segmentation CSV written by segment')
        parser.add_argument('--out', required=True, help='PLY path')
        self.add_output_argument(parser)

    def handle(self, *args, **options):
        scene = PipelineController.load_scene(options['scene'])
        result = ExportRepository.read_segmentation(options['segmentation'])
        ExportRepository.export_ply(result, scene.cloud, options['out'])
        self.emit({
            'ply': options['out'],
            'points': scene.cloud.size,
            'palette': {tag: list(label_color(tag)) for tag in result.vocabulary},
        }, options['json_out'])
