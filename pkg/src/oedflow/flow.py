"""Forward-Euler particle gradient flow with per-iteration diagnostics.

Each iteration assembles and factorizes the information matrix once; the
objective value, the stationarity residual, and the particle update all reuse
that single factorization.  A-optimal runs descend the velocity field,
D-optimal runs ascend it.  Particles keep uniform weight 1/N throughout; only
their locations move.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import assemble_information_matrix, factorize
from .criteria import objective_from_factor, velocity_batch
from .errors import ExcessiveStep

#: Abort when one step displaces a particle by this fraction of the domain
#: extent on any axis; forward Euler this far from the dt->0 regime is noise.
MAX_STEP_FRACTION = 0.1


@dataclass(frozen=True)
class FlowConfig:
    criterion: object
    n_particles: int
    dt: float
    n_iters: int
    seed: int = 0
    snapshot_every: int = 1

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.n_iters < 0:
            raise ValueError("n_iters must be >= 0")
        if not (1 <= self.snapshot_every <= max(1, self.n_iters)):
            raise ValueError("snapshot_every must lie in [1, max(1, n_iters)]")


@dataclass
class FlowTrace:
    """Per-iteration record: objective, residual, and particle snapshots."""

    objective_series: np.ndarray
    residual_series: np.ndarray  # (T+1, 2) columns (max, rms)
    snapshots: list = field(default_factory=list)  # (iteration, (N, p) array)

    @property
    def final_ensemble(self):
        return self.snapshots[-1][1]


def _advance(criterion, model, ensemble, factor, dt):
    """One Euler update from a prefactored matrix; returns (ensemble', velocities)."""
    v = velocity_batch(criterion, model, factor, ensemble)
    step = -criterion.descent_sign * dt * v
    limit = MAX_STEP_FRACTION * model.domain.extent
    worst = np.max(np.abs(step) / limit)
    if worst > 1.0:
        raise ExcessiveStep(
            f"a particle moved {worst * MAX_STEP_FRACTION:.2%} of the domain "
            f"extent in one step; reduce dt"
        )
    return model.domain.project(ensemble + step), v


def flow_step(criterion, model, ensemble, dt):
    """Single particle-flow step: theta' = project(theta -+ dt * velocity)."""
    factor = factorize(assemble_information_matrix(model, ensemble))
    new_ensemble, _ = _advance(criterion, model, ensemble, factor, dt)
    return new_ensemble


def run_flow(config, model, initial):
    """Run T Euler steps and record the full diagnostic trace.

    Deterministic given (config, model, initial).  If a step fails, the
    exception is re-raised with the trace accumulated so far attached as
    ``partial_trace``.
    """
    initial = np.asarray(initial, dtype=float)
    if initial.shape[0] != config.n_particles:
        raise ValueError(
            f"initial ensemble has {initial.shape[0]} particles, "
            f"config says {config.n_particles}"
        )
    t_total = config.n_iters
    objectives = []
    residuals = []
    snapshots = []
    ensemble = initial.copy()

    def _partial():
        return FlowTrace(
            np.asarray(objectives), np.asarray(residuals).reshape(-1, 2), snapshots
        )

    for t in range(t_total + 1):
        try:
            factor = factorize(assemble_information_matrix(model, ensemble))
            objectives.append(objective_from_factor(config.criterion, factor))
            if t == 0 or t == t_total or t % config.snapshot_every == 0:
                snapshots.append((t, ensemble.copy()))
            if t == t_total:
                v = velocity_batch(config.criterion, model, factor, ensemble)
            else:
                ensemble, v = _advance(config.criterion, model, ensemble, factor, config.dt)
            speeds = np.linalg.norm(v, axis=1)
            residuals.append((float(speeds.max()), float(np.sqrt(np.mean(speeds**2)))))
        except Exception as exc:
            exc.partial_trace = _partial()
            raise
    return _partial()
