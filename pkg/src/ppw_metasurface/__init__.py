"""Coupled-dipole model of parallel-plate-waveguide-fed metasurface antennas."""

from .errors import CoincidentPointsError, DomainError, SceneValidationError, SingularSystemError
from .scene import (AngularGrid, Element, Feed, ObservationSet, Scene, fraunhofer_distance,
                    random_scene, reference_scene, validate, wavenumber)
from .polarizability import effective_tensors, passivity_check, rr_correct, self_term
from .coupling import assemble_interaction, feed_matrix
from .solver import factorize, fixed_point_residual, power_report, solve_moments
from .radiation import channel_matrix, intensity, pattern, pattern_error

__version__ = "0.1.0"
