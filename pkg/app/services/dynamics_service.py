"""Local ingredients of the model Morse-Smale diffeomorphism.

The flow field has a saddle P(1, 0, 0) and a sink Q(-1, 0, 0) inside the ball
r^2 <= 4 and is the unit translation along x1 outside it.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from app.core.config import get_settings
from app.core.exceptions import AppException
from app.schemas.dynamics import (
    Classification,
    DynamicsCheck,
    DynamicsReport,
    MapSpectrum,
    Point3,
    SpectralReport,
    TorusPoint,
)

settings = get_settings()
logger = logging.getLogger(__name__)

SADDLE_P = Point3(x1=1.0, x2=0.0, x3=0.0)
SINK_Q = Point3(x1=-1.0, x2=0.0, x3=0.0)
ANALYTIC_SPECTRA = {
    "P": (4.0 / 3.0, -1.0, -1.0),
    "Q": (-4.0 / 3.0, -1.0, -1.0),
}

RESIDUAL_LIMIT = 1e-12
SPECTRUM_LIMIT = 1e-4
CONTINUITY_LIMIT = 1e-9
MODULAR_LIMIT = 1e-12
TRANSLATION_LIMIT = 1e-9
ROUND_TRIP_LIMIT = 1e-12
ORDER_RATIO_RANGE = (12.0, 20.0)
MAP_SPECTRUM_LIMIT = 1e-3
FLOW_STEP = 0.01


def _array(x: Point3 | np.ndarray | tuple) -> np.ndarray:
    if isinstance(x, Point3):
        return np.array(x.coords, dtype=float)
    return np.asarray(x, dtype=float)


def contract_h(x: Point3) -> Point3:
    return Point3(x1=x.x1 / 2, x2=x.x2 / 2, x3=x.x3 / 2)


def project_p(x: Point3) -> TorusPoint:
    """(x1/|x|, x2/|x|, log2|x| mod 1); the sign of x3 is kept to locate the S^2 point."""
    norm = math.sqrt(x.x1**2 + x.x2**2 + x.x3**2)
    if norm == 0.0:
        raise AppException("The origin has no image on S^2 x S^1.", code="dynamics.origin")
    circle = math.log2(norm) % 1.0
    if circle >= 1.0:
        circle = 0.0
    return TorusPoint(
        u1=x.x1 / norm,
        u2=x.x2 / norm,
        u3_sign=int(np.sign(x.x3)),
        circle=circle,
    )


def circular_distance(a: float, b: float) -> float:
    gap = abs(a - b) % 1.0
    return min(gap, 1.0 - gap)


# Vector field branches, each applied to arrays of shape (..., 3)


def _inner_branch(x: np.ndarray) -> np.ndarray:
    r2 = np.sum(x * x, axis=-1)
    return np.stack([1 - (r2 - 4) ** 2 / 9, -x[..., 1], -x[..., 2]], axis=-1)


def _middle_branch(x: np.ndarray) -> np.ndarray:
    r2 = np.sum(x * x, axis=-1)
    factor = 0.5 * (np.sin(np.pi / 2 * (r2 - 3)) - 1)
    return np.stack([1 - (r2 - 4) ** 2 / 9, factor * x[..., 1], factor * x[..., 2]], axis=-1)


def _outer_branch(x: np.ndarray) -> np.ndarray:
    ones = np.ones(x.shape[:-1])
    zeros = np.zeros(x.shape[:-1])
    return np.stack([ones, zeros, zeros], axis=-1)


def _phi(x: np.ndarray) -> np.ndarray:
    r2 = np.sum(x * x, axis=-1)[..., None]
    return np.where(r2 <= 2, _inner_branch(x), np.where(r2 <= 4, _middle_branch(x), _outer_branch(x)))


def vector_field_phi(x: Point3) -> Point3:
    return Point3.of(_phi(_array(x)))


def _rk4(points: np.ndarray, duration: float, step: float) -> np.ndarray:
    if step <= 0:
        raise AppException(f"Integration step must be positive, got {step}.", code="dynamics.step")
    if duration < 0:
        raise AppException(f"Integration time must be >= 0, got {duration}.", code="dynamics.duration")
    count = max(1, math.ceil(duration / step - 1e-9)) if duration > 0 else 0
    h = duration / count if count else 0.0
    x = np.array(points, dtype=float)
    for index in range(count):
        k1 = _phi(x)
        k2 = _phi(x + h / 2 * k1)
        k3 = _phi(x + h / 2 * k2)
        k4 = _phi(x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            logger.error("dynamics.integrate.non_finite step=%s h=%s", index, h)
            raise AppException(
                f"Integration produced non-finite values at step {index}.",
                code="dynamics.non_finite",
                extra={"step": index},
            )
    return x


def integrate_flow(x0: Point3, t: float, step: float = FLOW_STEP) -> Point3:
    """Fixed-step RK4; the step is shrunk so that t is a whole number of steps."""
    return Point3.of(_rk4(_array(x0), t, step))


def _eigen_pairs(values: np.ndarray) -> tuple[tuple[float, float], ...]:
    ordered = sorted(values, key=lambda value: (-value.real, value.imag))
    return tuple((float(value.real), float(value.imag)) for value in ordered)


def _classify_flow(values: np.ndarray, tolerance: float) -> Classification:
    real = np.real(values)
    if np.any(np.abs(real) <= tolerance):
        return "non-hyperbolic"
    if np.all(real < 0):
        return "sink"
    if np.all(real > 0):
        return "source"
    return "saddle"


def _classify_map(moduli: np.ndarray, tolerance: float) -> Classification:
    if np.any(np.abs(moduli - 1) <= tolerance):
        return "non-hyperbolic"
    if np.all(moduli < 1):
        return "sink"
    if np.all(moduli > 1):
        return "source"
    return "saddle"


def _central_jacobian(function, x: np.ndarray, step: float) -> np.ndarray:
    columns = []
    for axis in range(3):
        offset = np.zeros(3)
        offset[axis] = step
        columns.append((function(x + offset) - function(x - offset)) / (2 * step))
    return np.stack(columns, axis=1)


def spectral_at(x: Point3, tolerance: float | None = None, fd_step: float | None = None) -> SpectralReport:
    tolerance = settings.DYNAMICS_TOLERANCE if tolerance is None else tolerance
    fd_step = settings.DYNAMICS_FD_STEP if fd_step is None else fd_step
    point = _array(x)
    jacobian = _central_jacobian(_phi, point, fd_step)
    values = np.linalg.eigvals(jacobian)
    return SpectralReport(
        point=x,
        residual=float(np.max(np.abs(_phi(point)))),
        eigenvalues=_eigen_pairs(values),
        classification=_classify_flow(values, tolerance),
    )


def time_one_spectrum(
    x: Point3,
    step: float = FLOW_STEP,
    tolerance: float | None = None,
    fd_step: float | None = None,
) -> MapSpectrum:
    """Spectrum of the time-one map at x, by central differences of integrate_flow."""
    tolerance = settings.DYNAMICS_TOLERANCE if tolerance is None else tolerance
    fd_step = settings.DYNAMICS_FD_STEP if fd_step is None else fd_step
    jacobian = _central_jacobian(lambda point: _rk4(point, 1.0, step), _array(x), fd_step)
    values = np.linalg.eigvals(jacobian)
    moduli = np.abs(values)
    return MapSpectrum(
        point=x,
        eigenvalues=_eigen_pairs(values),
        moduli=tuple(sorted((float(value) for value in moduli), reverse=True)),
        classification=_classify_map(moduli, tolerance),
    )


def contraction_spectrum(tolerance: float | None = None) -> MapSpectrum:
    tolerance = settings.DYNAMICS_TOLERANCE if tolerance is None else tolerance
    jacobian = 0.5 * np.eye(3)
    values = np.linalg.eigvals(jacobian)
    moduli = np.abs(values)
    return MapSpectrum(
        point=Point3(x1=0.0, x2=0.0, x3=0.0),
        eigenvalues=_eigen_pairs(values),
        moduli=tuple(float(value) for value in moduli),
        classification=_classify_map(moduli, tolerance),
    )


def stereographic(x4: tuple[float, float, float, float]) -> Point3:
    x1, x2, x3, w = (float(value) for value in x4)
    denominator = 1.0 - w
    if abs(denominator) < 1e-15:
        raise AppException("The north pole has no stereographic image.", code="dynamics.north_pole")
    return Point3(x1=x1 / denominator, x2=x2 / denominator, x3=x3 / denominator)


def inverse_stereographic(y: Point3) -> tuple[float, float, float, float]:
    s = y.x1**2 + y.x2**2 + y.x3**2
    scale = 2.0 / (s + 1.0)
    return (y.x1 * scale, y.x2 * scale, y.x3 * scale, (s - 1.0) / (s + 1.0))


def separatrix_check(samples: int = 50, horizon: float = 20.0, step: float = 0.05) -> tuple[DynamicsCheck, DynamicsCheck]:
    """The segment |x1| < 1 on the x1-axis falls into Q; the ray x1 > 1 escapes."""
    segment = np.zeros((samples, 3))
    segment[:, 0] = np.linspace(-0.99, 0.99, samples)
    landed = _rk4(segment, horizon, step)
    segment_error = float(np.max(np.linalg.norm(landed - np.array(SINK_Q.coords), axis=1)))

    ray = np.zeros((samples, 3))
    ray[:, 0] = np.linspace(1.01, 3.0, samples)
    escaped = _rk4(ray, horizon, step)
    reach = float(np.min(escaped[:, 0]))
    escape_floor = 10.0
    return (
        DynamicsCheck(
            name="separatrix_segment_to_Q",
            value=segment_error,
            threshold=1e-3,
            passed=segment_error < 1e-3,
            detail=f"{samples} points on |x1|<1 after t={horizon:g}",
        ),
        DynamicsCheck(
            name="separatrix_ray_escapes",
            value=reach,
            threshold=escape_floor,
            passed=reach > escape_floor and bool(np.all(escaped[:, 0] > ray[:, 0])),
            detail=f"min x1 after t={horizon:g} from x1 in (1, 3]",
        ),
    )


def _random_directions(rng: np.random.Generator, count: int, dimension: int = 3) -> np.ndarray:
    directions = rng.normal(size=(count, dimension))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def _continuity(directions: np.ndarray, r2: float, lower, upper) -> float:
    points = directions * math.sqrt(r2)
    return float(np.max(np.abs(lower(points) - upper(points))))


def _order_ratio(steps: tuple[float, float] = (0.2, 0.1), duration: float = 2.0) -> float:
    """Error ratio of RK4 at two steps against a fine reference on a smooth inner trajectory."""
    start = np.array([0.5, 0.0, 0.0])
    reference = _rk4(start, duration, steps[1] / 64)
    coarse = np.linalg.norm(_rk4(start, duration, steps[0]) - reference)
    fine = np.linalg.norm(_rk4(start, duration, steps[1]) - reference)
    return float(coarse / fine) if fine > 0 else math.inf


def _check(name: str, value: float, threshold: float, passed: bool | None = None, detail: str = "") -> DynamicsCheck:
    return DynamicsCheck(
        name=name,
        value=float(value),
        threshold=float(threshold),
        passed=bool(value <= threshold) if passed is None else bool(passed),
        detail=detail,
    )


def _spectrum_error(report: SpectralReport, expected: tuple[float, ...]) -> float:
    observed = sorted((real for real, _ in report.eigenvalues), reverse=True)
    imaginary = max(abs(imag) for _, imag in report.eigenvalues)
    return max(max(abs(a - b) for a, b in zip(observed, sorted(expected, reverse=True))), imaginary)


def verify_dynamics(
    tolerance: float | None = None,
    samples: int | None = None,
    seed: int | None = None,
) -> DynamicsReport:
    tolerance = settings.DYNAMICS_TOLERANCE if tolerance is None else tolerance
    samples = settings.DYNAMICS_SAMPLES if samples is None else samples
    seed = settings.DYNAMICS_SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    logger.info("dynamics.verify.start tolerance=%s samples=%s seed=%s", tolerance, samples, seed)

    spectra = {name: spectral_at(point, tolerance) for name, point in (("P", SADDLE_P), ("Q", SINK_Q))}
    checks: list[DynamicsCheck] = []
    for name, report in spectra.items():
        checks.append(_check(f"residual_{name}", report.residual, RESIDUAL_LIMIT))
        checks.append(_check(f"spectrum_{name}", _spectrum_error(report, ANALYTIC_SPECTRA[name]), SPECTRUM_LIMIT))
        smallest = min(abs(real) for real, _ in report.eigenvalues)
        expected = "saddle" if name == "P" else "sink"
        checks.append(
            _check(
                f"hyperbolic_{name}",
                smallest,
                tolerance,
                passed=smallest > tolerance and report.classification == expected,
                detail=report.classification,
            )
        )

    directions = _random_directions(rng, samples)
    checks.append(_check("continuity_r2_2", _continuity(directions, 2.0, _inner_branch, _middle_branch), CONTINUITY_LIMIT))
    checks.append(_check("continuity_r2_4", _continuity(directions, 4.0, _middle_branch, _outer_branch), CONTINUITY_LIMIT))

    points = rng.uniform(-10.0, 10.0, size=(samples, 3))
    deviation = 0.0
    for row in points:
        x = Point3.of(row)
        if x.x1 == x.x2 == x.x3 == 0.0:
            continue
        before, after = project_p(x), project_p(contract_h(x))
        deviation = max(
            deviation,
            abs(before.u1 - after.u1),
            abs(before.u2 - after.u2),
            circular_distance(before.circle, after.circle),
        )
    checks.append(_check("projection_invariance", deviation, MODULAR_LIMIT))

    translated = integrate_flow(Point3(x1=5.0, x2=0.0, x3=0.0), 1.0, 0.01)
    checks.append(
        _check("outer_translation", float(np.max(np.abs(_array(translated) - [6.0, 0.0, 0.0]))), TRANSLATION_LIMIT)
    )
    ratio = _order_ratio()
    low, high = ORDER_RATIO_RANGE
    checks.append(_check("rk4_order_ratio", ratio, high, passed=low <= ratio <= high, detail="expected about 16"))

    map_spectra = (time_one_spectrum(SADDLE_P, tolerance=tolerance), time_one_spectrum(SINK_Q, tolerance=tolerance))
    for name, spectrum, expected_moduli, expected in (
        ("P", map_spectra[0], (math.exp(4 / 3), math.exp(-1), math.exp(-1)), "saddle"),
        ("Q", map_spectra[1], (math.exp(-1), math.exp(-1), math.exp(-4 / 3)), "sink"),
    ):
        error = max(abs(a - b) for a, b in zip(spectrum.moduli, expected_moduli))
        checks.append(
            _check(
                f"time_one_{name}",
                error,
                MAP_SPECTRUM_LIMIT,
                passed=error <= MAP_SPECTRUM_LIMIT and spectrum.classification == expected,
                detail=spectrum.classification,
            )
        )
    contraction = contraction_spectrum(tolerance)
    checks.append(
        _check(
            "contraction_sink",
            max(abs(value - 0.5) for value in contraction.moduli),
            tolerance,
            passed=contraction.classification == "sink",
            detail=contraction.classification,
        )
    )
    checks.extend(separatrix_check())

    spheres = _random_directions(rng, samples, dimension=4)
    round_trip = 0.0
    for row in spheres:
        if row[3] > 1 - 1e-9:
            continue
        back = inverse_stereographic(stereographic(tuple(row)))
        round_trip = max(round_trip, float(np.max(np.abs(np.array(back) - row))))
    checks.append(_check("stereographic_round_trip", round_trip, ROUND_TRIP_LIMIT))

    report = DynamicsReport(
        tolerance=tolerance,
        samples=samples,
        seed=seed,
        fixed_points=(spectra["P"], spectra["Q"]),
        map_spectra=map_spectra,
        checks=tuple(checks),
    )
    logger.info("dynamics.verify.done passed=%s checks=%s", report.all_passed, len(checks))
    return report


def format_report(report: DynamicsReport) -> str:
    lines = [
        f"# dynamics-verify tolerance={report.tolerance:g} samples={report.samples} seed={report.seed}",
        "# point\tresidual\teigenvalues\tclassification",
    ]
    for label, spectral in zip(("P", "Q"), report.fixed_points):
        values = ",".join(_format_complex(pair) for pair in spectral.eigenvalues)
        lines.append(f"{label}{spectral.point.coords}\t{spectral.residual:.3e}\t{values}\t{spectral.classification}")
    lines.append("# time-one map\tmoduli\tclassification")
    for label, spectrum in zip(("P", "Q"), report.map_spectra):
        moduli = ",".join(f"{value:.6f}" for value in spectrum.moduli)
        lines.append(f"{label}\t{moduli}\t{spectrum.classification}")
    lines.append("# check\tvalue\tthreshold\tresult")
    for check in report.checks:
        lines.append(f"{check.name}\t{check.value:.3e}\t{check.threshold:.3e}\t{'pass' if check.passed else 'FAIL'}")
    lines.append(f"# all_passed={str(report.all_passed).lower()}")
    return "\n".join(lines) + "\n"


def _format_complex(pair: tuple[float, float]) -> str:
    real, imag = pair
    if abs(imag) < 1e-12:
        return f"{real:.6f}"
    return f"{real:.6f}{imag:+.6f}i"
