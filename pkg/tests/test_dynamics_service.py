from __future__ import annotations

import math
import unittest

from app.core.exceptions import AppException
from app.schemas.dynamics import Point3
from app.services import dynamics_service


class VectorFieldTests(unittest.TestCase):
    def test_fixed_points_have_zero_residual(self):
        for point in (dynamics_service.SADDLE_P, dynamics_service.SINK_Q):
            report = dynamics_service.spectral_at(point)
            self.assertLess(report.residual, 1e-12)

    def test_saddle_and_sink_spectra(self):
        saddle = dynamics_service.spectral_at(dynamics_service.SADDLE_P)
        sink = dynamics_service.spectral_at(dynamics_service.SINK_Q)
        self.assertEqual(saddle.classification, "saddle")
        self.assertEqual(sink.classification, "sink")
        for (real, imag), expected in zip(saddle.eigenvalues, (4 / 3, -1.0, -1.0)):
            self.assertAlmostEqual(real, expected, places=5)
            self.assertAlmostEqual(imag, 0.0, places=8)
        self.assertAlmostEqual(sink.eigenvalues[-1][0], -4 / 3, places=5)

    def test_field_is_a_unit_translation_far_out(self):
        value = dynamics_service.vector_field_phi(Point3(x1=0.0, x2=3.0, x3=0.0))
        self.assertEqual(value.coords, (1.0, 0.0, 0.0))

    def test_outer_flow_translates(self):
        moved = dynamics_service.integrate_flow(Point3(x1=5.0, x2=0.0, x3=0.0), 1.0)
        self.assertAlmostEqual(moved.x1, 6.0, places=9)
        self.assertAlmostEqual(moved.x2, 0.0, places=12)

    def test_zero_time_is_identity(self):
        start = Point3(x1=0.3, x2=-0.2, x3=0.1)
        self.assertEqual(dynamics_service.integrate_flow(start, 0.0), start)

    def test_bad_integration_parameters(self):
        start = Point3(x1=0.0, x2=0.0, x3=0.0)
        with self.assertRaises(AppException) as ctx:
            dynamics_service.integrate_flow(start, 1.0, step=0.0)
        self.assertEqual(ctx.exception.code, "dynamics.step")
        with self.assertRaises(AppException) as ctx:
            dynamics_service.integrate_flow(start, -1.0)
        self.assertEqual(ctx.exception.code, "dynamics.duration")


class MapTests(unittest.TestCase):
    def test_time_one_moduli(self):
        saddle = dynamics_service.time_one_spectrum(dynamics_service.SADDLE_P)
        self.assertEqual(saddle.classification, "saddle")
        for observed, expected in zip(saddle.moduli, (math.exp(4 / 3), math.exp(-1), math.exp(-1))):
            self.assertAlmostEqual(observed, expected, delta=1e-3)
        sink = dynamics_service.time_one_spectrum(dynamics_service.SINK_Q)
        self.assertEqual(sink.classification, "sink")
        self.assertAlmostEqual(sink.moduli[-1], math.exp(-4 / 3), delta=1e-3)

    def test_contraction_is_a_sink(self):
        spectrum = dynamics_service.contraction_spectrum()
        self.assertEqual(spectrum.classification, "sink")
        self.assertEqual(spectrum.moduli, (0.5, 0.5, 0.5))

    def test_projection_is_invariant_under_contraction(self):
        x = Point3(x1=3.0, x2=-4.0, x3=1.5)
        before = dynamics_service.project_p(x)
        after = dynamics_service.project_p(dynamics_service.contract_h(x))
        self.assertAlmostEqual(before.u1, after.u1, places=12)
        self.assertAlmostEqual(before.u2, after.u2, places=12)
        self.assertEqual(before.u3_sign, after.u3_sign)
        self.assertLess(dynamics_service.circular_distance(before.circle, after.circle), 1e-12)

    def test_origin_has_no_projection(self):
        with self.assertRaises(AppException) as ctx:
            dynamics_service.project_p(Point3(x1=0.0, x2=0.0, x3=0.0))
        self.assertEqual(ctx.exception.code, "dynamics.origin")

    def test_circular_distance_wraps(self):
        self.assertAlmostEqual(dynamics_service.circular_distance(0.95, 0.05), 0.1)


class StereographicTests(unittest.TestCase):
    def test_round_trip(self):
        point = (0.6, 0.0, 0.0, -0.8)
        back = dynamics_service.inverse_stereographic(dynamics_service.stereographic(point))
        for a, b in zip(back, point):
            self.assertAlmostEqual(a, b, places=12)

    def test_south_pole_maps_to_origin(self):
        self.assertEqual(dynamics_service.stereographic((0.0, 0.0, 0.0, -1.0)).coords, (0.0, 0.0, 0.0))

    def test_north_pole_is_rejected(self):
        with self.assertRaises(AppException) as ctx:
            dynamics_service.stereographic((0.0, 0.0, 0.0, 1.0))
        self.assertEqual(ctx.exception.code, "dynamics.north_pole")


class VerifyTests(unittest.TestCase):
    def test_verification_passes(self):
        report = dynamics_service.verify_dynamics(samples=200, seed=7)
        failed = [check.name for check in report.checks if not check.passed]
        self.assertEqual(failed, [])
        self.assertTrue(report.all_passed)
        text = dynamics_service.format_report(report)
        self.assertTrue(text.startswith("# dynamics-verify"))
        self.assertTrue(text.rstrip("\n").endswith("# all_passed=true"))

    def test_same_seed_same_report(self):
        first = dynamics_service.verify_dynamics(samples=50, seed=3)
        second = dynamics_service.verify_dynamics(samples=50, seed=3)
        self.assertEqual(dynamics_service.format_report(first), dynamics_service.format_report(second))


if __name__ == "__main__":
    unittest.main()
