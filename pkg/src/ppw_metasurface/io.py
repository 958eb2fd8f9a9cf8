"""Scene files (YAML) and CSV outputs.

Scene file layout::

    frequency: 10 GHz
    plate: {height: 5.21 mm, size_x: 150 mm, size_y: 150 mm}
    elements:
      - {x: -39.8 mm, y: 17.3 mm, l1: 3.6 mm, l2: 3.05 mm, loss_delta: 0}
    feeds:
      - {x: 0 mm, y: 45 mm, current_re: 1, current_im: 0}
    observation:
      mode: ff            # or nf (needs radius)
      radius: 1 m
      theta_start: 0      # degrees unless suffixed with rad
      theta_stop: 90
      theta_step: 1
      phi_start: 0
      phi_stop: 360
      phi_step: 1

Bare numbers are SI (m, Hz, A, degrees for angles). Strings may carry a unit
suffix. An element may also carry ``intrinsic: [[re, im] x 4]`` (row-major
2x2 intrinsic tensor, m^3).
"""

import csv
import math
import re

import numpy as np
import yaml

from .scene import AngularGrid, Element, Feed, ObservationSet, Scene

_LENGTH = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6}
_FREQUENCY = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12}
_CURRENT = {"a": 1.0, "ma": 1e-3}
_ANGLE = {"deg": 1.0, "rad": 180.0 / math.pi}
_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


class SceneFileError(ValueError):
    """Malformed scene file; the message carries file, line and key."""


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    mapping = loader.construct_mapping(node, deep=True)
    out = _Lines(mapping)
    out.lines = {k.value: k.start_mark.line + 1 for k, _ in node.value}
    out.line = node.start_mark.line + 1
    return out


class _Lines(dict):
    lines = {}
    line = None


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


class _Reader:
    def __init__(self, source):
        self.source = source

    def fail(self, where, key, message):
        line = getattr(where, "lines", {}).get(key, getattr(where, "line", None))
        loc = f"{self.source}:{line}" if line else str(self.source)
        raise SceneFileError(f"{loc}: {key}: {message}")

    def section(self, where, key, required=True):
        if key not in where:
            if required:
                self.fail(where, key, "missing required key")
            return None
        return where[key]

    def quantity(self, where, key, units, default=None, label=None):
        label = label or key
        if key not in where:
            if default is None:
                self.fail(where, label, "missing required key")
            return default
        value = where[key]
        if isinstance(value, bool):
            self.fail(where, label, f"expected a number, got {value!r}")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            match = _NUMBER.match(value)
            if match:
                number, unit = float(match.group(1)), match.group(2).lower()
                if not unit:
                    return number
                if unit in units:
                    return number * units[unit]
                self.fail(where, label, f"unknown unit {match.group(2)!r}; expected one of {sorted(units)}")
        self.fail(where, label, f"expected a number with optional unit, got {value!r}")


def _intrinsic(reader, where, label):
    raw = where.get("intrinsic")
    if raw is None:
        return None
    try:
        arr = np.array(raw, dtype=float)
        if arr.shape != (4, 2):
            raise ValueError
    except (TypeError, ValueError):
        reader.fail(where, label, "intrinsic must be four [re, im] pairs")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(2, 2)


def scene_from_dict(data, source="<scene>"):
    reader = _Reader(source)
    if not isinstance(data, dict):
        raise SceneFileError(f"{source}: top level must be a mapping")
    frequency = reader.quantity(data, "frequency", _FREQUENCY)
    plate = reader.section(data, "plate")
    if not isinstance(plate, dict):
        reader.fail(data, "plate", "expected a mapping")
    height = reader.quantity(plate, "height", _LENGTH, label="plate.height")
    size = None
    if "size_x" in plate or "size_y" in plate:
        size = (reader.quantity(plate, "size_x", _LENGTH, label="plate.size_x"),
                reader.quantity(plate, "size_y", _LENGTH, label="plate.size_y"))

    elements = []
    raw_elements = reader.section(data, "elements")
    if not isinstance(raw_elements, list):
        reader.fail(data, "elements", "expected a list")
    for i, e in enumerate(raw_elements):
        tag = f"elements[{i}]"
        if not isinstance(e, dict):
            reader.fail(data, "elements", f"{tag} must be a mapping")
        elements.append(Element(
            (reader.quantity(e, "x", _LENGTH, label=f"{tag}.x"),
             reader.quantity(e, "y", _LENGTH, label=f"{tag}.y")),
            reader.quantity(e, "l1", _LENGTH, label=f"{tag}.l1"),
            reader.quantity(e, "l2", _LENGTH, label=f"{tag}.l2"),
            reader.quantity(e, "loss_delta", {}, default=0.0, label=f"{tag}.loss_delta"),
            _intrinsic(reader, e, f"{tag}.intrinsic"),
        ))

    feeds = []
    raw_feeds = reader.section(data, "feeds")
    if not isinstance(raw_feeds, list):
        reader.fail(data, "feeds", "expected a list")
    for i, f in enumerate(raw_feeds):
        tag = f"feeds[{i}]"
        if not isinstance(f, dict):
            reader.fail(data, "feeds", f"{tag} must be a mapping")
        current = complex(reader.quantity(f, "current_re", _CURRENT, default=0.0, label=f"{tag}.current_re"),
                          reader.quantity(f, "current_im", _CURRENT, default=0.0, label=f"{tag}.current_im"))
        feeds.append(Feed((reader.quantity(f, "x", _LENGTH, label=f"{tag}.x"),
                           reader.quantity(f, "y", _LENGTH, label=f"{tag}.y")), current))

    observation = None
    obs = data.get("observation")
    if obs is not None:
        if not isinstance(obs, dict):
            reader.fail(data, "observation", "expected a mapping")
        mode = str(obs.get("mode", "ff")).lower()
        if mode not in ("nf", "ff"):
            reader.fail(obs, "mode", f"expected 'nf' or 'ff', got {obs.get('mode')!r}")
        radius = None
        if "radius" in obs:
            radius = reader.quantity(obs, "radius", _LENGTH, label="observation.radius")
        defaults = AngularGrid()
        grid = AngularGrid(**{
            name: reader.quantity(obs, name, _ANGLE, default=getattr(defaults, name),
                                  label=f"observation.{name}")
            for name in ("theta_start", "theta_stop", "theta_step",
                         "phi_start", "phi_stop", "phi_step")})
        observation = ObservationSet(mode, radius, grid)

    return Scene(frequency, height, elements, feeds, size, observation)


def load_scene(path):
    """Parse a YAML scene file into a unit-normalised Scene (not yet validated)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return loads_scene(text, source=str(path))


def loads_scene(text, source="<scene>"):
    try:
        data = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise SceneFileError(f"{where}: {getattr(exc, 'problem', exc)}") from exc
    return scene_from_dict(data, source)


def scene_to_dict(scene):
    """Plain SI dictionary; floats dump via repr so re-parsing is exact."""
    out = {"frequency": scene.frequency,
           "plate": {"height": scene.plate_height}}
    if scene.plate_size is not None:
        out["plate"]["size_x"], out["plate"]["size_y"] = scene.plate_size
    elements = []
    for e in scene.elements:
        item = {"x": e.position[0], "y": e.position[1], "l1": e.l1, "l2": e.l2,
                "loss_delta": e.loss_delta}
        if e.intrinsic_override is not None:
            flat = np.array(e.intrinsic_override).ravel()
            item["intrinsic"] = [[float(v.real), float(v.imag)] for v in flat]
        elements.append(item)
    out["elements"] = elements
    out["feeds"] = [{"x": f.position[0], "y": f.position[1],
                     "current_re": f.current.real, "current_im": f.current.imag}
                    for f in scene.feeds]
    if scene.observation is not None:
        obs = scene.observation
        item = {"mode": obs.mode}
        if obs.radius is not None:
            item["radius"] = obs.radius
        for name in ("theta_start", "theta_stop", "theta_step", "phi_start", "phi_stop", "phi_step"):
            item[name] = getattr(obs.grid, name)
        out["observation"] = item
    return out


def dumps_scene(scene):
    return yaml.safe_dump(scene_to_dict(scene), sort_keys=False)


def save_scene(scene, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_scene(scene))


def fmt(value):
    """17 significant digits, scientific notation."""
    return f"{value:.16e}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_pattern_csv(path, grid, values):
    theta, phi = grid.mesh_deg()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["theta_deg", "phi_deg", "U_watts"])
        for t, p, u in zip(theta.ravel(), phi.ravel(), np.ravel(values)):
            w.writerow([fmt(t), fmt(p), fmt(u)])


def read_pattern_csv(path):
    """Return (theta_deg, phi_deg, U) as flat float arrays in file order."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["theta_deg", "phi_deg", "U_watts"]:
        raise ValueError(f"{path}: not a pattern CSV (bad header)")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float).reshape(-1, 3)
    return data[:, 0], data[:, 1], data[:, 2]


def write_matrix_csv(path, matrix):
    """Dense complex matrix as (row, col, re, im) lines, 0-based indices."""
    matrix = np.atleast_2d(matrix)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["row", "col", "re", "im"])
        for (r, c), v in np.ndenumerate(matrix):
            w.writerow([r, c, fmt(v.real), fmt(v.imag)])


def write_power_csv(path, report):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["element_index", "P_sup_W", "P_rad_W", "ratio"])
        for i, (s, r, q) in enumerate(zip(report.supplied, report.radiated, report.ratios)):
            w.writerow([i, fmt(s), fmt(r), "—" if math.isnan(q) else fmt(q)])
