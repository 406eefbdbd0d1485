from django.conf import settings

from ...controllers.pipeline_controller import PipelineController
from ...exceptions import UsageError
from ...models import Caption
from ...repositories.scene_repository import SceneRepository
from ...services.captioning_service import CaptioningService
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Extract vocabulary tags from captions'

    def add_arguments(self, parser):
        parser.add_argument('--captions', action='append', default=[], help='Caption JSONL file (repeatable)')
        parser.add_argument('--text', action='append', default=[], help='Caption text given inline (repeatable)')
        self.add_scene_argument(parser, required=False)
        parser.add_argument('--lexicon', default=None, help='Lexicon TSV (settings AVS.LEXICON_PATH)')
        self.add_bool_argument(parser, '--allow-compound', None, 'Emit compound nouns (settings AVS.ALLOW_COMPOUND)')
        self.add_output_argument(parser)

    def handle(self, *args, **options):
        captions = []
        if options['scene']:
            captions.extend(PipelineController.load_scene(options['scene']).captions)
        for path in options['captions']:
            captions.extend(SceneRepository.read_captions(path))
        captions.extend(Caption(text=text) for text in options['text'])
        if not captions:
            raise UsageError('no captions given: use --captions, --text or --scene')

        lexicon = PipelineController.load_lexicon(options['lexicon'])
        allow_compound = options['allow_compound']
        if allow_compound is None:
            allow_compound = settings.AVS['ALLOW_COMPOUND']
        per_caption = [
            {'text': c.text, 'tags': list(CaptioningService.caption_to_tags(c, lexicon, allow_compound))}
            for c in captions
        ]
        vocab = CaptioningService.captions_to_vocabulary(captions, lexicon, allow_compound)
        self.emit({'vocabulary': list(vocab), 'captions': per_caption}, options['json_out'])
