from django.conf import settings

from ...controllers.pipeline_controller import PipelineController, avs
from ...repositories.export_repository import ExportRepository
from ...repositories.lexicon_repository import LexiconRepository
from ...services.segmenter_service import SegmenterService, SegmentOptions
from ..base import PipelineCommand


class Command(PipelineCommand):
    help = 'Segment a scene against a vocabulary generated from labels, captions, point captions or ground truth'

    def add_arguments(self, parser):
        self.add_scene_argument(parser)
        self.add_space_arguments(parser)
        self.add_vocabulary_arguments(parser)
        self.add_partition_arguments(parser)
        self.add_bool_argument(parser, '--use-image', True, 'Fuse lifted image features (max per label)')
        parser.add_argument('--feature-source', choices=['oracle', 'smap'], default='oracle',
                            help='Point features: oracle encoder, or pooled per partition mask')
        parser.add_argument('--out', default=None, help='Segmentation CSV (a .json sidecar is written next to it)')
        parser.add_argument('--ply', default=None, help='Also export a coloured PLY')
        parser.add_argument('--vocab-out', default=None, help='Also write the vocabulary as a labels file')
        self.add_output_argument(parser)

    def handle(self, *args, **options):
        scene = PipelineController.load_scene(options['scene'])
        lexicon = PipelineController.load_lexicon(options['lexicon'])
        space = PipelineController.build_space(scene, lexicon=lexicon, **self.space_options(options))
        partition = self.partition_options(options)
        vocab = PipelineController.collect_vocabulary(
            scene, space, self.vocabulary_sources(options), partition, lexicon, options['k_decode'],
        )
        params = None
        if options['feature_source'] == 'smap':
            params = PipelineController.load_params(options['checkpoint'], space)
        segment_options = SegmentOptions(
            use_image=options['use_image'],
            feature_source=options['feature_source'],
            params=params,
            partition=partition.strategy,
            sectors=avs('SECTORS', partition.sectors),
            pillar_side=avs('PILLAR_SIDE', partition.pillar_side),
            use_pe=partition.use_pe,
            chunk=settings.AVS['ASSIGN_CHUNK'],
        )
        result = SegmenterService.segment_scene(scene, vocab, space, segment_options)

        if options['out']:
            ExportRepository.write_segmentation(result, options['out'], scene.name)
        if options['ply']:
            ExportRepository.export_ply(result, scene.cloud, options['ply'])
        if options['vocab_out']:
            LexiconRepository.write_labels(vocab, options['vocab_out'])
        counts = {tag: int((result.labels == i).sum()) for i, tag in enumerate(vocab)}
        document = {
            'scene': scene.name,
            'points': scene.cloud.size,
            'vocabulary': list(vocab),
            'label_counts': counts,
            'mean_score': float(result.scores.mean()),
        }
        if options['out']:
            document['segmentation'] = options['out']
        else:
            document['labels'] = result.labels
        if scene.cloud.has_ground_truth and list(vocab) == scene.cloud.label_table:
            document['accuracy'] = float((result.labels == scene.cloud.gt_labels).mean())
        self.emit(document, options['json_out'])
