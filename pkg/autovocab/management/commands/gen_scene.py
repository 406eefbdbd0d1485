from ...controllers.pipeline_controller import PipelineController
from ...repositories.blob import read_json
from ...repositories.scene_repository import SceneRepository
from ...serializers import SceneSpecSerializer, load_document
from ...services.scene_service import SceneService
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Generate a synthetic labelled scene from a JSON scene spec'

    def add_arguments(self, parser):
        parser.add_argument('--spec', required=True, help='Scene spec JSON (objects, cameras, captions, seed)')
        parser.add_argument('--out', required=True, help='Output scene directory')
        parser.add_argument('--seed', type=int, default=None, help='Override the spec seed')
        parser.add_argument('--lexicon', default=None, help='Lexicon TSV used to validate object labels')
        self.add_output_argument(parser)

    def handle(self, *args, **options):
        data = read_json(options['spec'], 'scene spec')
        if options['seed'] is not None and isinstance(data, dict):
            data = {**data, 'seed': options['seed']}
        spec = load_document(SceneSpecSerializer, data, options['spec'])
        lexicon = PipelineController.load_lexicon(options['lexicon'])
        scene = SceneService.generate_scene(spec, lexicon)
        manifest = SceneRepository.write_scene(scene, options['out'])
        self.emit({
            'scene': scene.name,
            'manifest': str(manifest),
            'points': scene.cloud.size,
            'classes': scene.cloud.label_table,
            'cameras': len(scene.cameras),
            'seed': scene.seed,
        }, options['json_out'])
