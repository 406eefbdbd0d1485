from ...controllers.pipeline_controller import PipelineController
from ...repositories.scene_repository import SceneRepository
from ...serializers import CaptionSerializer
from ...services.captioning_service import CaptioningService
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Caption every partition mask of a scene from its pooled point features'

    def add_arguments(self, parser):
        self.add_scene_argument(parser)
        self.add_space_arguments(parser)
        self.add_partition_arguments(parser)
        parser.add_argument('--checkpoint', default=None, help='SMAP checkpoint (identity pooling when omitted)')
        parser.add_argument('--k-decode', type=int, default=None, help='Tags decoded per mask (settings AVS.K_DECODE)')
        parser.add_argument('--lexicon', default=None, help='Lexicon TSV (settings AVS.LEXICON_PATH)')
        parser.add_argument('--out', default=None, help='Also write the captions as JSONL')
        self.add_output_argument(parser)

    def handle(self, *args, **options):
        scene = PipelineController.load_scene(options['scene'])
        lexicon = PipelineController.load_lexicon(options['lexicon'])
        space = PipelineController.build_space(scene, lexicon=lexicon, **self.space_options(options))
        params = PipelineController.load_params(options['checkpoint'], space)
        captions = PipelineController.point_captions(
            scene, space, lexicon, params, self.partition_options(options), options['k_decode'],
        )
        if options['out']:
            SceneRepository.write_captions(captions, options['out'])
        vocab = CaptioningService.captions_to_vocabulary(captions, lexicon)
        self.emit({
            'scene': scene.name,
            'captions': [CaptionSerializer.to_line(c) for c in captions],
            'vocabulary': list(vocab),
        }, options['json_out'])
