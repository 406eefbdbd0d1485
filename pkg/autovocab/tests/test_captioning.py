import numpy as np
from django.test import SimpleTestCase

from ..controllers.pipeline_controller import PartitionOptions, PipelineController
from ..exceptions import EmptyInputError, SchemaError
from ..models import Caption, CaptionSource, SmapParams, SyntheticSpace, Vocabulary
from ..repositories.lexicon_repository import LexiconRepository
from ..services.captioning_service import CaptioningService
from ..services.geometry_service import GeometryService
from ..services.scene_service import SceneService
from .factories import four_class_spec, lexicon, sector_scene_spec


def tags(text, allow_compound=True):
    return list(CaptioningService.caption_to_tags(Caption(text), lexicon(), allow_compound))


class CaptionToTagsTests(SimpleTestCase):
    def test_plural_nouns_are_singularised(self):
        self.assertEqual(tags('cars parked on the road'), ['car', 'road'])

    def test_punctuation_and_case(self):
        self.assertEqual(tags('A Building, with a signboard.'), ['building', 'signboard'])
        self.assertEqual(tags('a building with a signboard'), ['building', 'signboard'])

    def test_no_nouns(self):
        self.assertEqual(tags('the the the'), [])

    def test_blank_caption_rejected(self):
        with self.assertRaises(EmptyInputError):
            Caption('   ')

    def test_irregular_plurals(self):
        self.assertEqual(tags('people under the leaves'), ['person', 'leaf'])

    def test_invalid_nouns_are_dropped(self):
        self.assertEqual(tags('a thing near the car'), ['car'])

    def test_compound_emits_itself_and_constituents(self):
        self.assertEqual(tags('a traffic light by the road'), ['traffic light', 'traffic', 'light', 'road'])

    def test_compound_disabled(self):
        self.assertEqual(tags('a traffic light by the road', allow_compound=False), ['traffic', 'light', 'road'])

    def test_invalid_noun_breaks_a_run(self):
        self.assertEqual(tags('parking lot'), ['parking'])

    def test_duplicates_keep_first_occurrence(self):
        self.assertEqual(tags('cars and a car and the road and cars'), ['car', 'road'])

    def test_parsing_joined_tags_is_idempotent(self):
        for text in ('cars parked on the road', 'a traffic light by the road', 'a building with a signboard'):
            first = tags(text)
            self.assertEqual(tags(', '.join(first)), first)

    def test_compounds_are_runs_of_nouns(self):
        lex = lexicon()
        for tag in tags('a sedan street light next to the building'):
            for word in tag.split():
                self.assertTrue(lex.get(word).is_noun)


class VocabularyTests(SimpleTestCase):
    def test_merge_keeps_first_occurrence_order(self):
        merged = CaptioningService.merge_vocabularies([
            Vocabulary(('car', 'road')), Vocabulary(('tree', 'car')), Vocabulary(),
        ])
        self.assertEqual(list(merged), ['car', 'road', 'tree'])

    def test_captions_to_vocabulary(self):
        captions = [Caption('cars on the road'), Caption('a tree and a car', source_index=1)]
        vocab = CaptioningService.captions_to_vocabulary(captions, lexicon())
        self.assertEqual(list(vocab), ['car', 'road', 'tree'])

    def test_from_iterable_canonicalises(self):
        self.assertEqual(list(Vocabulary.from_iterable(['  Car ', 'car', 'Traffic   Light'])), ['car', 'traffic light'])

    def test_duplicates_rejected(self):
        with self.assertRaises(SchemaError):
            Vocabulary(('car', 'car'))

    def test_require_non_empty(self):
        with self.assertRaises(EmptyInputError):
            Vocabulary().require_non_empty()


class LexiconTests(SimpleTestCase):
    def test_parse_and_lookup(self):
        lex = LexiconRepository.parse('car\tnoun\tcar\t1\n# comment\nbus\tnoun\tbus\t1\nrun\tother\trun\t1\n')
        self.assertEqual(lex.lookup('cars').word, 'car')
        self.assertEqual(lex.lookup('buses').word, 'bus')
        self.assertIsNone(lex.lookup('trucks'))
        self.assertEqual(lex.nouns(), ['bus', 'car'])

    def test_parse_errors_name_the_line(self):
        bad = {
            'car\tnoun\tcar\n': 'line 1',
            'car\tnoun\tcar\t1\nCar\tnoun\tcar\t1\n': 'line 2',
            'car\tverb\tcar\t1\n': 'part of speech',
            'car\tnoun\tcar\tmaybe\n': 'valid flag',
            'car\tnoun\tcar\t1\ncar\tnoun\tcar\t1\n': 'duplicate',
        }
        for text, message in bad.items():
            with self.assertRaisesMessage(SchemaError, message):
                LexiconRepository.parse(text)

    def test_lemma_must_exist(self):
        with self.assertRaises(SchemaError):
            LexiconRepository.parse('cars\tnoun\tcar\t1\n')

    def test_bundled_lexicon(self):
        lex = lexicon()
        for word in ('car', 'road', 'building', 'signboard', 'tree'):
            self.assertIn(word, lex.nouns())
        self.assertNotIn('thing', lex.nouns())


class DecodeTests(SimpleTestCase):
    def setUp(self):
        self.space = SyntheticSpace(dim=64, seed=0)

    def test_anchor_decodes_to_its_label_first(self):
        for label in ('car', 'road', 'tree'):
            decoded = CaptioningService.decode_point_caption(self.space.anchor(label), self.space, lexicon(), 3)
            self.assertEqual(len(decoded), 3)
            self.assertEqual(decoded[0], label)

    def test_empty_mask_decodes_to_nothing(self):
        decoded = CaptioningService.decode_point_caption(self.space.anchor('car'), self.space, lexicon(), 3, empty=True)
        self.assertEqual(len(decoded), 0)

    def test_ties_break_alphabetically(self):
        decoded = CaptioningService.decode_point_caption(np.zeros(64), self.space, lexicon(), 4)
        self.assertEqual(list(decoded), lexicon().nouns()[:4])

    def test_compose_caption_parses_back(self):
        vocab = Vocabulary(('car', 'road', 'tree'))
        caption = CaptioningService.compose_caption(vocab, 5)
        self.assertEqual((caption.source, caption.source_index), (CaptionSource.POINT, 5))
        self.assertEqual(CaptioningService.caption_to_tags(caption, lexicon()), vocab)
        self.assertIsNone(CaptioningService.compose_caption(Vocabulary(), 0))


class PointCaptionerTests(SimpleTestCase):
    def test_sector_classes_are_recovered(self):
        """Every class of a sector is decoded when each holds a comparable share
        of the sector's points.

        Each box sits inside one sector and the ground disk puts about as many
        points in that sector. Untrained pooling averages a class holding a
        small fraction of a sector below unrelated lexicon nouns, so the share
        is checked before decoding is.
        """
        lex = lexicon()
        for seed in range(10):
            scene = SceneService.generate_scene(sector_scene_spec(seed=seed), lex)
            space = PipelineController.build_space(scene, dim=64, seed=seed)
            params = SmapParams.identity(space.dim, hidden=8, heads=4)
            captions = PipelineController.point_captions(scene, space, lex, params, PartitionOptions(sectors=12), k=3)
            decoded = {c.source_index: set(CaptioningService.caption_to_tags(c, lex)) for c in captions}
            masks = GeometryService.sector_masks(scene.cloud, 12)
            names = np.array(scene.cloud.label_table)[scene.cloud.gt_labels]
            for j in range(masks.count):
                present = set(names[masks.masks[j]].tolist())
                if not present:
                    self.assertNotIn(j, decoded)
                    continue
                self.assertLessEqual(len(present), 3)
                _, counts = np.unique(names[masks.masks[j]], return_counts=True)
                self.assertGreaterEqual(counts.min() / counts.sum(), 0.25)
                self.assertTrue(present <= decoded[j], msg=f'seed {seed} sector {j}: {present} vs {decoded[j]}')


class LemmatizeTests(SimpleTestCase):
    def test_nouns_map_to_their_singular(self):
        lex = lexicon()
        self.assertEqual(CaptioningService.lemmatize('cars', lex), 'car')
        self.assertEqual(CaptioningService.lemmatize('people', lex), 'person')
        self.assertEqual(CaptioningService.lemmatize('road', lex), 'road')

    def test_non_nouns_and_invalid_nouns_give_none(self):
        lex = lexicon()
        for token in ('the', 'thing', 'zzz'):
            self.assertIsNone(CaptioningService.lemmatize(token, lex))


class AnchorPlacementTests(SimpleTestCase):
    def test_anchor_does_not_depend_on_encoding_order(self):
        lex = lexicon()
        scene = SceneService.generate_scene(four_class_spec(seed=0), lex)
        for seed in range(20):
            bare = PipelineController.build_space(dim=8, seed=seed)
            expected = bare.anchor('car').copy()
            with_scene = PipelineController.build_space(scene, dim=8, seed=seed)
            CaptioningService.decode_point_caption(with_scene.anchor('tree'), with_scene, lex, 3)
            np.testing.assert_array_equal(with_scene.anchor('car'), expected, err_msg=f'seed {seed}')
