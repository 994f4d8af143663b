"""A-/D-optimal objectives, their measure derivatives, and particle velocities.

Conventions, for an information matrix M sampled from the ensemble:

* A-optimal minimizes  trace(M^-1);  its pointwise derivative is
  -a(theta)^T M^-2 a(theta)  (always <= 0) and the particle velocity field is
  -2 J(theta)^T M^-2 a(theta)  with J the (d, p) row Jacobian.
* D-optimal maximizes  log det M;  derivative  a^T M^-1 a  (always >= 0),
  velocity  +2 J^T M^-1 a.

Velocity and derivative evaluations take a prefactored handle so the d x d
solve cost is paid once per iteration and shared across all N particles.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .core import assemble_information_matrix, factorize
from .errors import AsymmetricPerturbation


class Criterion(enum.Enum):
    A_OPTIMAL = "A"
    D_OPTIMAL = "D"

    @property
    def minimizes(self):
        return self is Criterion.A_OPTIMAL

    @property
    def descent_sign(self):
        """+1 when the flow descends the velocity field, -1 when it ascends."""
        return 1.0 if self.minimizes else -1.0


def objective_from_factor(criterion, factor):
    if criterion is Criterion.A_OPTIMAL:
        return factor.trace_inverse
    return factor.log_det


def objective(criterion, model, ensemble):
    """Criterion value of the empirical measure carried by the ensemble."""
    factor = factorize(assemble_information_matrix(model, ensemble))
    return objective_from_factor(criterion, factor)


def frechet(criterion, model, factor, theta):
    """Pointwise derivative of the objective with respect to the measure."""
    a = model.row(theta)
    if criterion is Criterion.A_OPTIMAL:
        return -float(a @ factor.solve_squared(a))
    return float(a @ factor.solve(a))


def frechet_batch(criterion, model, factor, thetas):
    """frechet() over an (N, p) batch, reusing one set of factored solves."""
    rows = model.rows(thetas)
    if criterion is Criterion.A_OPTIMAL:
        x = factor.solve_squared(rows.T)
        return -np.einsum("nd,dn->n", rows, x)
    x = factor.solve(rows.T)
    return np.einsum("nd,dn->n", rows, x)


def velocity(criterion, model, factor, theta):
    """Gradient in theta of the pointwise derivative; the particle flow field."""
    a = model.row(theta)
    jac = model.row_jacobian(theta)
    if criterion is Criterion.A_OPTIMAL:
        return -2.0 * (jac.T @ factor.solve_squared(a))
    return 2.0 * (jac.T @ factor.solve(a))


def velocity_batch(criterion, model, factor, thetas):
    """velocity() over an (N, p) batch; returns (N, p)."""
    thetas = np.asarray(thetas, dtype=float)
    rows = model.rows(thetas)
    jacs = model.row_jacobians(thetas)
    if criterion is Criterion.A_OPTIMAL:
        x = factor.solve_squared(rows.T)
        return -2.0 * np.einsum("ndp,dn->np", jacs, x)
    x = factor.solve(rows.T)
    return 2.0 * np.einsum("ndp,dn->np", jacs, x)


def stationarity_residual(criterion, model, ensemble):
    """(max, rms) of particle speeds; both vanish at a critical measure."""
    factor = factorize(assemble_information_matrix(model, ensemble))
    v = velocity_batch(criterion, model, factor, ensemble)
    speeds = np.linalg.norm(v, axis=1)
    return float(speeds.max()), float(np.sqrt(np.mean(speeds**2)))


@dataclass(frozen=True)
class PerturbationMatrix:
    """Second moment of a signed measure; symmetric, trace of either sign."""

    d_mat: np.ndarray


def perturbation_matrix(model, plus, minus):
    """D = M[plus] - M[minus], the second moment of the signed measure plus - minus."""
    m_plus = assemble_information_matrix(model, plus).m
    m_minus = assemble_information_matrix(model, minus).m
    return PerturbationMatrix(m_plus - m_minus)


def hessian_form(criterion, info, perturbation):
    """Quadratic form of the objective's second derivative along a perturbation.

    A-optimal:  2 trace(M^-1 D M^-1 D M^-1)  >= 0
    D-optimal:  -trace(D M^-1 D M^-1)        <= 0
    """
    d_mat = np.asarray(perturbation.d_mat, dtype=float)
    asym = np.linalg.norm(d_mat - d_mat.T)
    scale = np.linalg.norm(d_mat)
    if asym > 1e-10 * max(scale, 1e-300):
        raise AsymmetricPerturbation(
            f"perturbation asymmetry {asym:.3e} exceeds 1e-10 of its norm"
        )
    factor = factorize(info)
    b = factor.solve(d_mat)  # M^-1 D
    if criterion is Criterion.A_OPTIMAL:
        c = factor.solve(b.T)  # M^-1 D M^-1
        return 2.0 * float(np.sum(c * b))
    return -float(np.sum(b * b.T))
