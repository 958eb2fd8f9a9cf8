"""Problem description: plate, irises, feeds and observation geometry.

Everything is stored in SI base units. The metasurface lies in the z = 0
plane and the plate is centred on the origin, which is also the TX centre
used for the common spherical basis.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

SPEED_OF_LIGHT = constants.c
MIN_SEPARATION = 1e-9
QUASI_STATIC_LIMIT = 1.5


def _pair(value):
    x, y = value
    return (float(x), float(y))


def _tensor(value):
    if value is None:
        return None
    arr = np.asarray(value, dtype=complex)
    if arr.shape != (2, 2):
        raise ValueError(f"intrinsic override must be 2x2, got shape {arr.shape}")
    return tuple(tuple(complex(v) for v in row) for row in arr)


@dataclass(frozen=True)
class Element:
    """Elliptic iris with semi-major axis ``l1`` along x and semi-minor ``l2`` along y.

    ``loss_delta`` [1/m^3] adds ``j*loss_delta*I`` to the intrinsic inverse
    polarizability; ``intrinsic_override`` replaces the closed-form intrinsic
    tensor altogether.
    """

    position: tuple
    l1: float
    l2: float
    loss_delta: float = 0.0
    intrinsic_override: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "position", _pair(self.position))
        object.__setattr__(self, "l1", float(self.l1))
        object.__setattr__(self, "l2", float(self.l2))
        object.__setattr__(self, "loss_delta", float(self.loss_delta))
        object.__setattr__(self, "intrinsic_override", _tensor(self.intrinsic_override))


@dataclass(frozen=True)
class Feed:
    """Thin-wire line current ``current`` [A] at ``position`` inside the guide."""

    position: tuple
    current: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", _pair(self.position))
        object.__setattr__(self, "current", complex(self.current))


@dataclass(frozen=True)
class AngularGrid:
    """Uniform cell-centred (theta, phi) grid, angles in degrees.

    Cells are ``[start + i*step, start + (i+1)*step)``; samples sit at the
    cell midpoints so theta = 90 deg is never evaluated.
    """

    theta_start: float = 0.0
    theta_stop: float = 90.0
    theta_step: float = 1.0
    phi_start: float = 0.0
    phi_stop: float = 360.0
    phi_step: float = 1.0

    @staticmethod
    def _count(start, stop, step):
        n = (stop - start) / step
        return int(round(n))

    @property
    def shape(self):
        return (self._count(self.theta_start, self.theta_stop, self.theta_step),
                self._count(self.phi_start, self.phi_stop, self.phi_step))

    @property
    def theta_deg(self):
        return self.theta_start + (np.arange(self.shape[0]) + 0.5) * self.theta_step

    @property
    def phi_deg(self):
        return self.phi_start + (np.arange(self.shape[1]) + 0.5) * self.phi_step

    @property
    def theta(self):
        return np.deg2rad(self.theta_deg)

    @property
    def phi(self):
        return np.deg2rad(self.phi_deg)

    def mesh(self):
        return np.meshgrid(self.theta, self.phi, indexing="ij")

    def mesh_deg(self):
        return np.meshgrid(self.theta_deg, self.phi_deg, indexing="ij")

    def weights(self):
        """Midpoint-rule solid-angle weights sin(theta) dtheta dphi."""
        theta, _ = self.mesh()
        return np.sin(theta) * np.deg2rad(self.theta_step) * np.deg2rad(self.phi_step)

    def directions(self):
        theta, phi = self.mesh()
        return np.stack([np.sin(theta) * np.cos(phi),
                         np.sin(theta) * np.sin(phi),
                         np.cos(theta)], axis=-1)

    def problems(self):
        out = []
        for name in ("theta", "phi"):
            start = getattr(self, f"{name}_start")
            stop = getattr(self, f"{name}_stop")
            step = getattr(self, f"{name}_step")
            if not step > 0:
                out.append(f"{name} step must be positive, got {step}")
                continue
            if not stop > start:
                out.append(f"{name} range [{start}, {stop}) is empty")
                continue
            n = (stop - start) / step
            if abs(n - round(n)) > 1e-9 * max(1.0, n):
                out.append(f"{name} step {step} does not divide [{start}, {stop})")
        if self.theta_start < 0 or self.theta_stop > 90:
            out.append("theta range must lie within the upper half-space [0, 90) deg")
        return out


@dataclass(frozen=True)
class ObservationSet:
    """Where fields are evaluated.

    ``mode`` is ``"nf"`` (points at ``radius`` from the TX centre, per-dipole
    geometry) or ``"ff"`` (steering-vector form; ``radius`` is only the
    reference distance used for absolute field scale, default 1 m).
    """

    mode: str = "ff"
    radius: float = None
    grid: AngularGrid = field(default_factory=AngularGrid)

    def __post_init__(self):
        object.__setattr__(self, "mode", str(self.mode).lower())
        if self.radius is not None:
            object.__setattr__(self, "radius", float(self.radius))

    @property
    def reference_radius(self):
        return self.radius if self.radius is not None else 1.0

    def points(self):
        """Cartesian observation points, shape ``grid.shape + (3,)``."""
        return self.reference_radius * self.grid.directions()


@dataclass(frozen=True)
class Scene:
    frequency: float
    plate_height: float
    elements: tuple
    feeds: tuple
    plate_size: tuple = None
    observation: ObservationSet = None

    def __post_init__(self):
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "plate_height", float(self.plate_height))
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "feeds", tuple(self.feeds))
        if self.plate_size is not None:
            object.__setattr__(self, "plate_size", _pair(self.plate_size))

    @property
    def k(self):
        return wavenumber(self)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.frequency

    @property
    def omega(self):
        return 2.0 * math.pi * self.frequency

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def element_positions(self):
        return np.array([e.position for e in self.elements], dtype=float).reshape(-1, 2)

    @property
    def feed_positions(self):
        return np.array([f.position for f in self.feeds], dtype=float).reshape(-1, 2)

    @property
    def currents(self):
        return np.array([f.current for f in self.feeds], dtype=complex)

    def with_currents(self, currents):
        currents = np.asarray(currents, dtype=complex)
        if currents.shape != (len(self.feeds),):
            raise ValueError(f"expected {len(self.feeds)} currents, got shape {currents.shape}")
        feeds = tuple(Feed(f.position, c) for f, c in zip(self.feeds, currents))
        return Scene(self.frequency, self.plate_height, self.elements, feeds,
                     self.plate_size, self.observation)

    def with_elements(self, elements):
        return Scene(self.frequency, self.plate_height, tuple(elements), self.feeds,
                     self.plate_size, self.observation)


def wavenumber(scene):
    """Free-space wavenumber 2*pi*f/c of the air-filled guide [rad/m]."""
    return 2.0 * math.pi * scene.frequency / SPEED_OF_LIGHT


def fraunhofer_distance(scene):
    """2 D^2 / lambda with D the plate diagonal."""
    if scene.plate_size is None:
        raise ValueError("fraunhofer_distance needs plate_size")
    diag = math.hypot(*scene.plate_size)
    return 2.0 * diag ** 2 / scene.wavelength


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def _finite(*values):
    return all(math.isfinite(abs(v)) for v in values)


def validate(scene):
    """Check every scene invariant; returns a report instead of raising."""
    report = ValidationReport()
    bad = report.violations.append

    if not (_finite(scene.frequency) and scene.frequency > 0):
        bad(f"frequency must be positive and finite, got {scene.frequency}")
    if not (_finite(scene.plate_height) and scene.plate_height > 0):
        bad(f"plate height must be positive and finite, got {scene.plate_height}")
    if not scene.elements:
        bad("scene has no elements")
    if not scene.feeds:
        bad("scene has no feeds")

    for i, e in enumerate(scene.elements):
        if not _finite(*e.position, e.l1, e.l2, e.loss_delta):
            bad(f"element {i}: non-finite field")
            continue
        if not e.l2 > 0:
            bad(f"element {i}: semi-minor axis l2 must be positive, got {e.l2}")
        if e.l2 > e.l1:
            bad(f"element {i}: semi-minor axis l2={e.l2} exceeds semi-major l1={e.l1}")
        if e.loss_delta < 0:
            bad(f"element {i}: loss_delta must be nonnegative, got {e.loss_delta}")

    half = None
    if scene.plate_size is not None:
        sx, sy = scene.plate_size
        if not (sx > 0 and sy > 0):
            bad(f"plate size must be positive, got {scene.plate_size}")
        else:
            half = (sx / 2.0, sy / 2.0)
    for i, f in enumerate(scene.feeds):
        if not _finite(*f.position, f.current):
            bad(f"feed {i}: non-finite position or current")
            continue
        if half is not None and not (abs(f.position[0]) < half[0] and abs(f.position[1]) < half[1]):
            bad(f"feed {i}: position {f.position} is not strictly inside the plate")

    labels = [f"element {i}" for i in range(len(scene.elements))]
    labels += [f"feed {i}" for i in range(len(scene.feeds))]
    pts = np.array([e.position for e in scene.elements] + [f.position for f in scene.feeds],
                   dtype=float).reshape(-1, 2)
    if len(pts) > 1 and np.all(np.isfinite(pts)):
        d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
        ii, jj = np.nonzero(np.triu(d <= MIN_SEPARATION, k=1))
        for a, b in zip(ii, jj):
            bad(f"{labels[a]} and {labels[b]} coincide (separation {d[a, b]:.3g} m)")

    obs = scene.observation
    if obs is not None:
        if obs.mode not in ("nf", "ff"):
            bad(f"observation mode must be 'nf' or 'ff', got {obs.mode!r}")
        for p in obs.grid.problems():
            bad(f"observation grid: {p}")
        if obs.mode == "nf":
            if obs.radius is None:
                bad("near-field observation requires a radius")
            elif scene.plate_size is not None and obs.radius <= math.hypot(*scene.plate_size) / 2:
                bad(f"near-field radius {obs.radius} m does not clear the plate half-diagonal")
        if obs.radius is not None and not obs.radius > 0:
            bad(f"observation radius must be positive, got {obs.radius}")

    if report.ok and scene.elements:
        k = wavenumber(scene)
        worst = max(range(len(scene.elements)), key=lambda i: scene.elements[i].l1)
        size = k * 2.0 * scene.elements[worst].l1
        if size > QUASI_STATIC_LIMIT:
            report.warnings.append(
                f"element {worst}: electrical size k*(2*l1) = {size:.4f} exceeds the "
                f"quasi-static limit {QUASI_STATIC_LIMIT}")
    return report


# (x [mm], y [mm], l2 [mm]); l1 = 3.6 mm for every iris.
_REFERENCE_IRISES = (
    (-39.8, 17.3, 3.05),
    (-4.1, -16.1, 2.54),
    (-18.0, 36.0, 1.83),
    (50.2, -40.0, 3.46),
    (18.9, -25.0, 2.42),
    (57.9, 52.1, 2.07),
    (16.8, 31.3, 3.33),
    (-27.5, -33.9, 1.76),
    (20.2, -60.4, 2.78),
    (-36.0, 46.5, 1.75),
)


def reference_scene(observation=None):
    """Ten-iris, two-feed validation scene at 10 GHz.

    150 x 150 mm plate, h = 5.21 mm, feeds at (0, +/-45) mm with 1 A each,
    irises with l1 = 3.6 mm. Iris positions and l2 values are a fixed layout
    with at least 14 mm spacing.
    """
    mm = 1e-3
    elements = [Element((x * mm, y * mm), 3.6 * mm, b * mm) for x, y, b in _REFERENCE_IRISES]
    feeds = [Feed((0.0, 45 * mm), 1.0), Feed((0.0, -45 * mm), 1.0)]
    return Scene(10e9, 5.21 * mm, elements, feeds, (150 * mm, 150 * mm), observation)


def random_scene(rng, n_elements, frequency=10e9, plate_height=5.21e-3, size=0.15,
                 min_spacing=None, l1=3.6e-3, n_feeds=2, loss_delta=0.0, max_tries=10000):
    """Random irises in a ``size`` square, rejection-sampled for ``min_spacing``.

    Default spacing is a tenth of a wavelength; feeds are placed randomly
    under the same spacing rule.
    """
    wavelength = SPEED_OF_LIGHT / frequency
    spacing = wavelength / 10 if min_spacing is None else min_spacing
    half = size / 2.0
    pts = []
    tries = 0
    while len(pts) < n_elements + n_feeds:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("could not place points with the requested spacing")
        p = rng.uniform(-0.95 * half, 0.95 * half, 2)
        if all(math.hypot(*(p - q)) >= spacing for q in pts):
            pts.append(p)
    l2 = rng.uniform(0.2, 1.0, n_elements) * l1
    elements = [Element(tuple(p), l1, b, loss_delta) for p, b in zip(pts[:n_elements], l2)]
    currents = rng.normal(size=n_feeds) + 1j * rng.normal(size=n_feeds)
    feeds = [Feed(tuple(p), c) for p, c in zip(pts[n_elements:], currents)]
    return Scene(frequency, plate_height, elements, feeds, (size, size))
