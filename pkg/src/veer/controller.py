"""Per-tick avoidance controller: scan in, scaled velocity command out."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

from .baseline_pf import SpherePfParams, sphere_pf_command
from .params import AvoidanceParams
from .pipeline import DirectionOutcome, direction_command
from .predictor import PredictionTrace, choose_velocity, projection_ttc_scale
from .push_blend import limit_acceleration
from .range_image import RangeImage, RigidMotion
from .scan_history import HistoryState, aggregate, prune_scan


class Method(enum.Enum):
    """Command-generation variants selectable per scenario."""

    ANGULAR = "angular"  # velocity-adjusted support + trajectory prediction
    ANGULAR_NO_VEL = "angular_no_vel"  # Euclidean support radius ablation
    ANGULAR_NO_PRED = "angular_no_pred"  # projection time-to-contact ablation
    SPHERE_PF = "sphere_pf"  # two-sphere Cartesian potential field baseline


@dataclass
class TickResult:
    command: np.ndarray
    unscaled: np.ndarray
    outcome: DirectionOutcome | None
    trace: PredictionTrace | None
    history: RangeImage


class AvoidanceController:
    """Owns the scan history and the previous command across ticks."""

    def __init__(
        self,
        params: AvoidanceParams,
        method: Method = Method.ANGULAR,
        v_max: float = 3.0,
        start_time: float = 0.0,
    ):
        if method is Method.ANGULAR_NO_VEL and params.velocity_support:
            params = dataclasses.replace(params, velocity_support=False)
        self.params = params
        self.method = method
        self.pf_params = SpherePfParams.from_avoidance(params, v_max)
        self.state = HistoryState.initial(params, start_time)
        self.prev_command = np.zeros(3)

    def reset(self, start_time: float = 0.0) -> None:
        self.state = HistoryState.initial(self.params, start_time)
        self.prev_command = np.zeros(3)

    def update(
        self,
        scan: RangeImage,
        v_target: np.ndarray,
        v_current: np.ndarray,
        motion_since_last: RigidMotion,
        now: float,
    ) -> TickResult:
        """Ingest one scan and produce the velocity command for this tick."""
        params = self.params
        pruned = prune_scan(scan, v_current, params)
        self.state = aggregate(self.state, pruned, motion_since_last, now, params)
        history = self.state.history
        view = self.state.view if self.state.view is not None else history

        if self.method is Method.SPHERE_PF:
            command = sphere_pf_command(view, v_target, self.pf_params, params)
            self.prev_command = command
            return TickResult(command, command, None, None, history)

        outcome = direction_command(view, v_target, v_current, params)
        unscaled = limit_acceleration(
            self.prev_command, outcome.command, outcome.d_near, params
        )
        if self.method is Method.ANGULAR_NO_PRED:
            command = projection_ttc_scale(view, unscaled, params)
            trace = None
        else:
            command, trace = choose_velocity(view, unscaled, v_current, params)
        self.prev_command = command
        return TickResult(command, unscaled, outcome, trace, history)
