"""Reactive LiDAR range-image obstacle avoidance.

Angular potential fields on the range image choose the flight direction;
iterative trajectory prediction with time-to-contact estimation scales the
speed.  Ships with a deterministic closed-loop simulator, a benchmark
harness and a teleoperation service.
"""

from .angular_field import DirectionResult, adjust_direction, repulsive_force, support_radius
from .controller import AvoidanceController, Method, TickResult
from .params import AvoidanceParams, ImageGeometry
from .pipeline import DirectionOutcome, direction_command
from .predictor import (
    PredictionTrace,
    StopReason,
    choose_velocity,
    scale_command,
    step_axis,
    unroll,
)
from .push_blend import Regime, blend, compute_push, decide_regime, limit_acceleration
from .range_image import (
    INVALID_RANGE,
    RangeImage,
    RigidMotion,
    angles_to_pixel,
    pixel_to_point,
    point_to_angles,
    warp,
)
from .scan_history import HistoryState, aggregate, prune_scan

__all__ = [
    "AvoidanceController",
    "AvoidanceParams",
    "DirectionOutcome",
    "DirectionResult",
    "HistoryState",
    "ImageGeometry",
    "INVALID_RANGE",
    "Method",
    "PredictionTrace",
    "RangeImage",
    "Regime",
    "RigidMotion",
    "StopReason",
    "TickResult",
    "adjust_direction",
    "aggregate",
    "angles_to_pixel",
    "blend",
    "choose_velocity",
    "compute_push",
    "decide_regime",
    "direction_command",
    "limit_acceleration",
    "pixel_to_point",
    "point_to_angles",
    "prune_scan",
    "repulsive_force",
    "scale_command",
    "step_axis",
    "support_radius",
    "unroll",
    "warp",
]

__version__ = "0.1.0"
