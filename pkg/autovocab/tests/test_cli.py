import io
import json
import logging
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from ..cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, run

SPEC = {
    'name': 'street',
    'seed': 11,
    'objects': [
        {'label': 'road', 'shape': 'plane', 'center': [0, 0, 0], 'extent': [16, 16, 0], 'point_count': 200},
        {'label': 'car', 'shape': 'box', 'center': [4, 0, 0.8], 'extent': [3, 1.6, 1.4], 'point_count': 100},
        {'label': 'building', 'shape': 'box', 'center': [-5, 3, 3], 'extent': [2, 4, 6], 'point_count': 100},
        {'label': 'tree', 'shape': 'cylinder', 'center': [0, -5, 2], 'extent': [1, 1, 4], 'point_count': 100},
    ],
    'cameras': [
        {'eye': [12, 0, 4], 'target': [0, 0, 0], 'focal': 60, 'width': 120, 'height': 90},
        {'eye': [-12, 0, 4], 'target': [0, 0, 0], 'focal': 60, 'width': 120, 'height': 90},
    ],
    'captions': [
        {'text': 'a car parked on the road', 'index': 0},
        {'text': 'a building behind a tree', 'index': 1},
    ],
}


class CliTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)
        self.spec = self.root / 'spec.json'
        self.spec.write_text(json.dumps(SPEC))

    def call(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        code = run([str(a) for a in argv], stdout=stdout, stderr=stderr)
        return code, stdout.getvalue(), stderr.getvalue()

    def ok(self, *argv):
        code, out, err = self.call(*argv)
        self.assertEqual(code, EXIT_OK, msg=err)
        return json.loads(out) if out.strip() else None

    def scene(self, name='scene'):
        self.ok('gen-scene', '--spec', self.spec, '--out', self.root / name)
        return self.root / name

    def test_gen_scene(self):
        code, out, _ = self.call('gen-scene', '--spec', self.spec, '--out', self.root / 'scene')
        self.assertEqual(code, EXIT_OK)
        document = json.loads(out)
        self.assertEqual(document['points'], 500)
        self.assertEqual(document['classes'], ['road', 'car', 'building', 'tree'])
        self.assertEqual(document['cameras'], 2)
        self.assertTrue((self.root / 'scene' / 'scene.json').is_file())

    def test_segment_then_evaluate(self):
        scene = self.scene()
        seg = self.root / 'seg.csv'
        self.ok('segment', '--scene', scene, '--vocab-from-gt', '--use-image=false', '--out', seg)
        self.ok('eval', '--scene', scene, '--segmentation', seg, '--out', self.root / 'report.json')
        report = json.loads((self.root / 'report.json').read_text())
        self.assertEqual(report['miou'], 1.0)
        self.assertEqual(report['accuracy'], 1.0)
        self.assertAlmostEqual(report['tpss'], 1.0, delta=1e-9)
        self.assertEqual([m['target_label'] for m in report['mapping']], ['road', 'car', 'building', 'tree'])

    def test_segment_with_caption_vocabulary(self):
        scene = self.scene()
        document = self.ok('segment', '--scene', scene, '--captions')
        self.assertEqual(document['vocabulary'], ['car', 'road', 'building', 'tree'])
        self.assertEqual(sum(document['label_counts'].values()), 500)
        self.assertEqual(len(document['labels']), 500)

    def test_map_and_export(self):
        scene = self.scene()
        seg = self.root / 'seg.csv'
        self.ok('segment', '--scene', scene, '--vocab-from-gt', '--out', seg)
        mapping = self.ok('map', '--segmentation', seg, '--scene', scene, '--out', self.root / 'map.csv')
        self.assertTrue((self.root / 'map.csv').is_file())
        self.assertEqual(len(mapping['pairs']), 4)
        self.ok('eval', '--scene', scene, '--segmentation', seg, '--mapping', self.root / 'map.csv',
                '--with-tpss=false', '--out', self.root / 'mapped.json')
        self.assertEqual(json.loads((self.root / 'mapped.json').read_text())['tpss'], None)
        self.ok('export-ply', '--scene', scene, '--segmentation', seg, '--out', self.root / 'seg.ply')
        self.assertTrue((self.root / 'seg.ply').read_text().startswith('ply'))

    def test_tpss_of_ground_truth_names(self):
        scene = self.scene()
        labels = self.root / 'labels.txt'
        labels.write_text('road\ncar\nbuilding\ntree\n')
        document = self.ok('tpss', '--scene', scene, '--labels', labels)
        self.assertAlmostEqual(document['tpss'], 1.0, delta=1e-9)

    def test_tags(self):
        document = self.ok('tags', '--text', 'cars parked on the road', '--text', 'a traffic light')
        self.assertEqual(document['vocabulary'], ['car', 'road', 'traffic light', 'traffic', 'light'])

    def test_caption_points(self):
        scene = self.scene()
        document = self.ok('caption-points', '--scene', scene, '--out', self.root / 'points.jsonl')
        lines = (self.root / 'points.jsonl').read_text().splitlines()
        self.assertEqual(len(lines), len(document['captions']))
        self.assertEqual(json.loads(lines[0])['source'], 'point')

    def test_vocabulary_file_feeds_tpss(self):
        scene = self.scene()
        vocab = self.root / 'vocab.txt'
        self.ok('segment', '--scene', scene, '--captions', '--vocab-out', vocab, '--out', self.root / 'seg.csv')
        self.assertEqual(vocab.read_text(), 'car\nroad\nbuilding\ntree\n')
        document = self.ok('tpss', '--scene', scene, '--labels', vocab)
        self.assertAlmostEqual(document['tpss'], 1.0, delta=1e-9)

    def run_twice(self, name, *argv):
        """Run a subcommand twice with identical flags; everything it wrote
        under ``root/name`` must come out byte-identical."""
        out = self.root / name
        out.mkdir(exist_ok=True)
        snapshots = []
        for _ in range(2):
            self.ok(*[str(a).replace('{out}', str(out)) for a in argv])
            snapshots.append({
                str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob('*')) if p.is_file()
            })
        self.assertTrue(snapshots[0], msg=name)
        self.assertEqual(snapshots[0], snapshots[1], msg=name)
        return out

    def test_repeated_runs_are_byte_identical(self):
        gen = self.run_twice('gen', 'gen-scene', '--spec', self.spec, '--out', '{out}/scene',
                             '--json-out', '{out}/gen.json')
        scene = gen / 'scene'
        self.run_twice('tags', 'tags', '--scene', scene, '--json-out', '{out}/tags.json')
        self.run_twice('points', 'caption-points', '--scene', scene, '--out', '{out}/points.jsonl',
                       '--json-out', '{out}/points.json')
        seg = self.run_twice('segment', 'segment', '--scene', scene, '--vocab-from-gt', '--out', '{out}/seg.csv',
                             '--ply', '{out}/seg.ply', '--vocab-out', '{out}/vocab.txt',
                             '--json-out', '{out}/segment.json')
        self.run_twice('tpss', 'tpss', '--scene', scene, '--labels', seg / 'vocab.txt', '--vocab-from-gt',
                       '--json-out', '{out}/tpss.json')
        mapped = self.run_twice('map', 'map', '--segmentation', seg / 'seg.csv', '--scene', scene,
                                '--out', '{out}/map.csv', '--json-out', '{out}/map.json')
        self.run_twice('eval', 'eval', '--scene', scene, '--segmentation', seg / 'seg.csv',
                       '--mapping', mapped / 'map.csv', '--out', '{out}/report.json')
        self.run_twice('train', 'train-smap', '--scene', scene, '--epochs', 2, '--lr', 1e-3, '--hidden', 4,
                       '--dim', 16, '--out', '{out}/smap.ckpt', '--json-out', '{out}/train.json')
        self.run_twice('ply', 'export-ply', '--scene', scene, '--segmentation', seg / 'seg.csv',
                       '--out', '{out}/seg.ply', '--json-out', '{out}/export.json')

    def test_no_arguments(self):
        code, _, err = self.call()
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('usage:', err)

    def test_unknown_subcommand(self):
        code, _, err = self.call('paint')
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('usage_error', err)
        self.assertIn('usage:', err)

    def test_unknown_flag(self):
        code, _, err = self.call('tags', '--text', 'a car', '--colour', 'red')
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn('usage_error', err)

    def test_missing_vocabulary_source(self):
        code, _, _ = self.call('segment', '--scene', self.scene())
        self.assertEqual(code, EXIT_USAGE)

    def test_missing_file(self):
        code, _, err = self.call('segment', '--scene', self.root / 'absent', '--vocab-from-gt')
        self.assertEqual(code, EXIT_DATA)
        self.assertIn('absent', err)

    def test_corrupt_blob(self):
        scene = self.scene()
        (scene / 'points.avsp').write_bytes(b'AVSP\x05\x00\x00\x00')
        code, _, _ = self.call('segment', '--scene', scene, '--vocab-from-gt')
        self.assertEqual(code, EXIT_DATA)


class LoggingSettingsTests(SimpleTestCase):
    def test_training_progress_is_quiet_by_default(self):
        training = logging.getLogger('autovocab.services.training_service')
        self.assertEqual(training.getEffectiveLevel(), logging.WARNING)
