"""Rotation sets of homotopically trivial surface maps, computed on the lift to the disk."""
__version__ = "0.1.0"

from .dynamics import EquivariantMap, MapSequence, PushSpec, make_scenario, step
from .estimators import (
    EquidistributionTransformer,
    HomologyRotation,
    TrackingEstimator,
    homology_rotation,
    rotation_speed,
    run_orbit,
    tracking_geodesic,
)
from .geometry import BoundaryPoint, Geodesic, Isometry, compose, dist, mobius
from .group import SurfaceGroup, Word, build_group
from .structure import ClassPartitioner, LabeledGraph, cycle_mean_polytope, surface_cross
