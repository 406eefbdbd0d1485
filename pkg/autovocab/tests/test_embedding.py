import numpy as np
from django.test import SimpleTestCase

from ..exceptions import DimensionMismatchError, EmptyInputError, SchemaError
from ..models import PointCloud, RowRole, SyntheticSpace
from ..models.embedding import SEPARATION_BOUND
from ..services.embedding_service import EmbeddingService
from ..services.geometry_service import GeometryService
from .factories import FOUR_CLASSES, pinhole, random_cloud, ring_cameras


class SyntheticSpaceTests(SimpleTestCase):
    def test_anchor_is_deterministic(self):
        first = EmbeddingService.encode_text(SyntheticSpace(seed=5), 'car')
        second = EmbeddingService.encode_text(SyntheticSpace(seed=5), 'car')
        self.assertEqual(first.tobytes(), second.tobytes())
        self.assertAlmostEqual(float(np.linalg.norm(first)), 1.0, places=12)

    def test_labels_are_canonicalised(self):
        space = SyntheticSpace()
        np.testing.assert_array_equal(space.anchor(' Car '), space.anchor('car'))

    def test_empty_label_rejected(self):
        with self.assertRaises(EmptyInputError):
            SyntheticSpace().anchor('   ')

    def test_anchors_are_separated(self):
        space = SyntheticSpace(dim=64, seed=11)
        labels = [f'label{i}' for i in range(64)]
        table = EmbeddingService.encode_texts(space, labels).values
        gram = table @ table.T
        off = np.abs(gram[~np.eye(len(labels), dtype=bool)])
        self.assertLess(off.max(), SEPARATION_BOUND)
        self.assertLess(abs(space.anchor('car') @ space.anchor('road')), SEPARATION_BOUND)

    def test_synonym_is_close_to_its_base(self):
        space = SyntheticSpace(seed=2)
        car = space.anchor('car')
        sedan = space.add_synonym('sedan', 'car', delta_norm=0.05)
        self.assertGreater(float(car @ sedan), 0.99)
        self.assertLess(abs(float(space.anchor('road') @ sedan)), SEPARATION_BOUND)

    def test_dimension_must_be_usable(self):
        with self.assertRaises(SchemaError):
            SyntheticSpace(dim=1)


class OracleEncoderTests(SimpleTestCase):
    def test_noiseless_rows_equal_anchors(self):
        space = SyntheticSpace(seed=1)
        cloud = random_cloud(40, seed=1)
        feats = EmbeddingService.encode_points_oracle(space, cloud)
        self.assertEqual(feats.row_role, RowRole.PER_POINT)
        for n in range(cloud.size):
            np.testing.assert_array_equal(feats.values[n], space.anchor(cloud.label_table[cloud.gt_labels[n]]))

    def test_noisy_rows_stay_nearest_to_own_anchor(self):
        space = SyntheticSpace(seed=3, noise_sigma=0.1)
        cloud = random_cloud(500, seed=3)
        feats = EmbeddingService.encode_points_oracle(space, cloud).values
        anchors = np.stack([space.anchor(name) for name in FOUR_CLASSES])
        np.testing.assert_allclose(np.linalg.norm(feats, axis=1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(np.argmax(feats @ anchors.T, axis=1), cloud.gt_labels)

    def test_noise_is_reproducible(self):
        cloud = random_cloud(50, seed=4)
        a = EmbeddingService.encode_points_oracle(SyntheticSpace(seed=9, noise_sigma=0.2), cloud).values
        b = EmbeddingService.encode_points_oracle(SyntheticSpace(seed=9, noise_sigma=0.2), cloud).values
        self.assertEqual(a.tobytes(), b.tobytes())

    def test_needs_ground_truth(self):
        with self.assertRaises(SchemaError):
            EmbeddingService.encode_points_oracle(SyntheticSpace(), PointCloud(coords=np.zeros((3, 3))))


class ImageFeatureTests(SimpleTestCase):
    def cloud(self, points, labels):
        return PointCloud(coords=np.array(points, dtype=np.float64), gt_labels=np.array(labels),
                          label_table=['car', 'road'])

    def test_single_point_fills_one_cell(self):
        space = SyntheticSpace()
        cloud = self.cloud([(0.0, 0.0, 2.0)], [0])
        pixels = EmbeddingService.render_image_features(space, cloud, pinhole(), (10, 10))
        self.assertEqual(int(pixels.valid.sum()), 1)
        np.testing.assert_array_equal(pixels.values[pixels.valid][0], space.anchor('car'))
        np.testing.assert_array_equal(pixels.values[~pixels.valid], 0.0)

    def test_nearest_point_wins_the_cell(self):
        space = SyntheticSpace()
        cloud = self.cloud([(0.0, 0.0, 2.0), (0.0, 0.0, 1.0)], [0, 1])
        pixels = EmbeddingService.render_image_features(space, cloud, pinhole(), (10, 10))
        np.testing.assert_array_equal(pixels.values[pixels.valid][0], space.anchor('road'))

    def test_matches_brute_force_z_buffer(self):
        space = SyntheticSpace(seed=6)
        cloud = random_cloud(400, seed=6)
        cam = ring_cameras(1)[0]
        grid = (9, 12)
        pixels = EmbeddingService.render_image_features(space, cloud, cam, grid)
        uv, depth, visible = GeometryService.project_points(cloud.coords, cam)
        best = {}
        for n in np.flatnonzero(visible):
            row = min(int(np.floor(uv[n, 1] * grid[0] / cam.height)), grid[0] - 1)
            col = min(int(np.floor(uv[n, 0] * grid[1] / cam.width)), grid[1] - 1)
            cell = row * grid[1] + col
            if cell not in best or depth[n] < depth[best[cell]]:
                best[cell] = n
        self.assertEqual(sorted(best), np.flatnonzero(pixels.valid).tolist())
        for cell, n in best.items():
            np.testing.assert_array_equal(pixels.values[cell], space.anchor(cloud.label_table[cloud.gt_labels[n]]))

    def test_lift_round_trip_and_hidden_points(self):
        space = SyntheticSpace()
        cloud = self.cloud([(0.0, 0.0, 2.0), (0.0, 0.0, -2.0)], [1, 0])
        cam = pinhole()
        pixels = EmbeddingService.render_image_features(space, cloud, cam, (cam.height, cam.width))
        lifted, flags = EmbeddingService.lift_to_points(pixels, cloud, cam)
        self.assertEqual(flags.tolist(), [True, False])
        np.testing.assert_array_equal(lifted.values[0], space.anchor('road'))
        np.testing.assert_array_equal(lifted.values[1], 0.0)

    def test_multi_camera_lift_takes_the_closest_camera(self):
        space = SyntheticSpace(seed=7)
        cloud = random_cloud(300, seed=7)
        cams = ring_cameras(3)
        lifted, flags = EmbeddingService.lift_from_cameras(space, cloud, cams)
        per_camera = [EmbeddingService.lift_to_points(
            EmbeddingService.render_image_features(space, cloud, cam, (cam.height, cam.width)), cloud, cam,
        ) for cam in cams]
        depths = [GeometryService.project_points(cloud.coords, cam)[1] for cam in cams]
        for n in range(cloud.size):
            candidates = [k for k in range(len(cams)) if per_camera[k][1][n]]
            self.assertEqual(flags[n], bool(candidates))
            if candidates:
                k = min(candidates, key=lambda c: (depths[c][n], c))
                np.testing.assert_array_equal(lifted.values[n], per_camera[k][0].values[n])


class SimilarityTests(SimpleTestCase):
    def test_unit_vector_with_itself(self):
        v = SyntheticSpace().anchor('car')
        self.assertAlmostEqual(EmbeddingService.similarity(v, v), 1.0, places=12)

    def test_orthogonal_basis(self):
        self.assertEqual(EmbeddingService.similarity(np.eye(3)[0], np.eye(3)[1]), 0.0)

    def test_matches_scalar_loop_and_is_bilinear(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=64), rng.normal(size=64)
        expected = sum(float(x) * float(y) for x, y in zip(a, b))
        self.assertAlmostEqual(EmbeddingService.similarity(a, b), expected, delta=1e-12)
        self.assertAlmostEqual(EmbeddingService.similarity(2.5 * a, b), 2.5 * EmbeddingService.similarity(a, b),
                               delta=1e-12)
        self.assertAlmostEqual(EmbeddingService.similarity(a, b), EmbeddingService.similarity(b, a), delta=1e-12)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            EmbeddingService.similarity(np.ones(3), np.ones(4))
