import numpy as np
from django.test import SimpleTestCase

from ..exceptions import SchemaError, UsageError
from ..models import Camera, MaskKind, PointCloud
from ..services.geometry_service import GeometryService
from .factories import pinhole, random_cloud, ring_cameras


def cloud_of(*points):
    return PointCloud(coords=np.array(points, dtype=np.float64))


class PolarTests(SimpleTestCase):
    def test_axis_aligned_point(self):
        polar = GeometryService.to_polar(cloud_of((1.0, 0.0, 5.0)))
        np.testing.assert_allclose(polar[0], [1.0, 0.0, 5.0])

    def test_negative_angle_is_shifted(self):
        polar = GeometryService.to_polar(cloud_of((0.0, -1.0, 0.0)))
        np.testing.assert_allclose(polar[0], [1.0, 1.5 * np.pi, 0.0])

    def test_origin_has_zero_angle(self):
        self.assertEqual(GeometryService.to_polar(cloud_of((0.0, 0.0, 2.0)))[0, 1], 0.0)

    def test_matches_scalar_formula(self):
        cloud = random_cloud(100, seed=3)
        polar = GeometryService.to_polar(cloud)
        for (x, y, z), (rho, phi, pz) in zip(cloud.coords, polar):
            expected = np.arctan2(y, x) % (2 * np.pi)
            self.assertAlmostEqual(rho, np.hypot(x, y), places=12)
            self.assertAlmostEqual(phi, expected, places=12)
            self.assertEqual(pz, z)
            self.assertTrue(0.0 <= phi < 2 * np.pi)

    def test_round_trip_through_cartesian(self):
        cloud = random_cloud(200, seed=4)
        back = GeometryService.from_polar(GeometryService.to_polar(cloud))
        np.testing.assert_allclose(back, cloud.coords, atol=1e-12)


class SectorMaskTests(SimpleTestCase):
    def test_single_sector_holds_everything(self):
        masks = GeometryService.sector_masks(random_cloud(50, seed=1), 1)
        self.assertEqual(masks.count, 1)
        self.assertTrue(masks.masks.all())
        self.assertEqual(masks.kind, MaskKind.SECTOR)

    def test_quarter_turn_lands_in_sector_three(self):
        masks = GeometryService.sector_masks(cloud_of((0.0, 1.0, 0.0)), 12)
        self.assertEqual(masks.members(3).tolist(), [0])
        self.assertEqual(int(masks.masks.sum()), 1)

    def test_sectors_partition_random_clouds(self):
        for seed in range(100):
            cloud = random_cloud(1000, seed=seed)
            for sectors in (1, 6, 12, 24):
                masks = GeometryService.sector_masks(cloud, sectors)
                self.assertEqual(masks.count, sectors)
                self.assertTrue(np.all(masks.masks.sum(axis=0) == 1))

    def test_rotation_shifts_sectors_cyclically(self):
        for seed in range(50):
            cloud = random_cloud(300, seed=seed)
            phi = GeometryService.to_polar(cloud)[:, 1]
            for sectors in (6, 12, 24):
                width = 2 * np.pi / sectors
                offset = phi / width
                # points on a sector boundary may round either way once rotated
                base = PointCloud(coords=cloud.coords[np.abs(offset - np.round(offset)) > 1e-9])
                masks = GeometryService.sector_masks(base, sectors).masks
                for k in range(sectors):
                    c, s = np.cos(k * width), np.sin(k * width)
                    rotation = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
                    turned = GeometryService.sector_masks(PointCloud(coords=base.coords @ rotation.T), sectors).masks
                    np.testing.assert_array_equal(turned, np.roll(masks, k, axis=0),
                                                  err_msg=f'seed {seed} T={sectors} k={k}')

    def test_zero_sectors_rejected(self):
        with self.assertRaises(UsageError):
            GeometryService.sector_masks(random_cloud(5, seed=0), 0)


class PillarMaskTests(SimpleTestCase):
    def test_same_cell(self):
        masks = GeometryService.pillar_masks(cloud_of((0.1, 0.1, 0.0), (0.4, 0.3, 2.0)), 0.5)
        self.assertEqual(masks.count, 1)
        self.assertTrue(masks.masks.all())

    def test_adjacent_cells(self):
        masks = GeometryService.pillar_masks(cloud_of((0.1, 0.1, 0.0), (0.6, 0.1, 0.0)), 0.5)
        self.assertEqual(masks.count, 2)
        self.assertEqual(masks.masks.sum(axis=1).tolist(), [1, 1])
        self.assertEqual(masks.keys, [(0, 0), (1, 0)])

    def test_pillars_partition_random_clouds(self):
        for seed in range(100):
            cloud = random_cloud(1000, seed=seed)
            for side in (0.5, 1.0):
                masks = GeometryService.pillar_masks(cloud, side)
                self.assertTrue(np.all(masks.masks.sum(axis=0) == 1))
                self.assertFalse(masks.empty.any())

    def test_non_positive_side_rejected(self):
        with self.assertRaises(UsageError):
            GeometryService.pillar_masks(random_cloud(5, seed=0), 0.0)

    def test_partition_dispatch(self):
        cloud = random_cloud(30, seed=2)
        self.assertEqual(GeometryService.partition(cloud, 'pillar', side=1.0).kind, MaskKind.PILLAR)
        self.assertEqual(GeometryService.partition(cloud, 'sector', sectors=6).count, 6)
        with self.assertRaises(UsageError):
            GeometryService.partition(cloud, 'voxel')


class ProjectionTests(SimpleTestCase):
    def test_optical_axis_maps_to_principal_point(self):
        self.assertEqual(GeometryService.project_point((0.0, 0.0, 1.0), pinhole()), (50.0, 50.0))

    def test_point_behind_camera_is_invisible(self):
        self.assertIsNone(GeometryService.project_point((0.0, 0.0, -1.0), pinhole()))

    def test_pinhole_formula(self):
        u, v = GeometryService.project_point((0.1, 0.0, 1.0), pinhole())
        self.assertAlmostEqual(u, 60.0)
        self.assertAlmostEqual(v, 50.0)

    def test_outside_image_is_invisible(self):
        self.assertIsNone(GeometryService.project_point((1.0, 0.0, 1.0), pinhole()))

    def test_look_at_centres_the_target(self):
        cam = Camera.look_at((10.0, 0.0, 3.0), (0.0, 0.0, 0.0), focal=50.0, width=80, height=60)
        u, v = GeometryService.project_point((0.0, 0.0, 0.0), cam)
        self.assertAlmostEqual(u, 40.0)
        self.assertAlmostEqual(v, 30.0)
        # world up is image up
        _, v_above = GeometryService.project_point((0.0, 0.0, 1.0), cam)
        self.assertLess(v_above, v)

    def test_matches_homogeneous_projection(self):
        visible = 0
        for seed, cam in enumerate(ring_cameras() + [pinhole()]):
            coords = random_cloud(200, seed=seed, spread=3.0).coords
            projection = cam.intrinsics @ cam.extrinsics[:3]
            for point in coords:
                h = projection @ np.append(point, 1.0)
                if h[2] <= 1e-6:
                    continue
                uv = GeometryService.project_point(point, cam)
                if uv is None:
                    continue
                visible += 1
                np.testing.assert_allclose(uv, h[:2] / h[2], rtol=0, atol=1e-9)
        self.assertGreater(visible, 100)

    def test_invalid_camera_rejected(self):
        with self.assertRaises(SchemaError):
            Camera(intrinsics=np.eye(3) * 2, extrinsics=np.eye(4), width=10, height=10)
        bad = np.eye(4)
        bad[0, 0] = 2.0
        with self.assertRaises(SchemaError):
            Camera(intrinsics=np.eye(3), extrinsics=bad, width=10, height=10)


class VisibilityMaskTests(SimpleTestCase):
    def test_points_on_axis_all_visible(self):
        cloud = cloud_of((0.0, 0.0, 1.0), (0.0, 0.0, 2.0), (0.0, 0.0, 5.0))
        masks = GeometryService.visibility_masks(cloud, [pinhole()])
        self.assertTrue(masks.masks.all())
        self.assertEqual(masks.kind, MaskKind.VISIBILITY)

    def test_points_behind_all_hidden(self):
        cloud = cloud_of((0.0, 0.0, -1.0), (0.2, 0.1, -3.0))
        self.assertFalse(GeometryService.visibility_masks(cloud, [pinhole()]).masks.any())

    def test_matches_per_point_projection(self):
        cloud = random_cloud(300, seed=8)
        cams = ring_cameras(2)
        masks = GeometryService.visibility_masks(cloud, cams)
        for k, cam in enumerate(cams):
            expected = [GeometryService.project_point(p, cam) is not None for p in cloud.coords]
            self.assertEqual(masks.masks[k].tolist(), expected)

    def test_needs_a_camera(self):
        with self.assertRaises(UsageError):
            GeometryService.visibility_masks(random_cloud(5, seed=0), [])
