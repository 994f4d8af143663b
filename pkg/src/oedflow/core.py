"""Design domains, particle ensembles, and information-matrix linear algebra.

Ensembles are plain float arrays of shape (N, p): N equally weighted design
points in a p-dimensional domain.  A single design point is a length-p array.
All types here are immutable after construction and every operation is a pure
function, so they are safe to share across parallel workers.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NonFiniteCoordinate, SingularInformationMatrix

PERIODIC = "periodic"
CLAMP = "clamp"

#: Condition number above which the information matrix counts as singular.
#: d <= 20 in double precision leaves ample headroom below this.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class DesignDomain:
    """Axis-aligned box with a per-axis boundary rule (periodic or clamp)."""

    lower: np.ndarray
    upper: np.ndarray
    boundary_modes: tuple

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower/upper must be 1-d arrays of equal length")
        if not np.all(lower < upper):
            raise ValueError("need lower < upper on every axis")
        if len(self.boundary_modes) != lower.size:
            raise ValueError("one boundary mode per axis")
        for mode in self.boundary_modes:
            if mode not in (PERIODIC, CLAMP):
                raise ValueError(f"unknown boundary mode {mode!r}")

    @property
    def dim(self):
        return self.lower.size

    @property
    def extent(self):
        return self.upper - self.lower

    def project(self, theta):
        """Map coordinates back into the domain.

        Periodic axes wrap into [lower, upper); clamp axes clip to
        [lower, upper].  Works on a single point (p,) or a batch (N, p).
        Raises NonFiniteCoordinate on NaN/inf input.
        """
        theta = np.asarray(theta, dtype=float)
        if not np.all(np.isfinite(theta)):
            raise NonFiniteCoordinate(
                "non-finite particle coordinate; step size is likely too large"
            )
        out = theta.copy()
        moved = out.reshape(-1, self.dim)
        for k, mode in enumerate(self.boundary_modes):
            lo, hi = self.lower[k], self.upper[k]
            if mode == PERIODIC:
                moved[:, k] = lo + np.mod(moved[:, k] - lo, hi - lo)
            else:
                moved[:, k] = np.clip(moved[:, k], lo, hi)
        return moved.reshape(theta.shape)

    def contains(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(-1, self.dim)
        ok = np.ones(theta.shape[0], dtype=bool)
        for k, mode in enumerate(self.boundary_modes):
            lo, hi = self.lower[k], self.upper[k]
            if mode == PERIODIC:
                ok &= (theta[:, k] >= lo) & (theta[:, k] < hi)
            else:
                ok &= (theta[:, k] >= lo) & (theta[:, k] <= hi)
        return ok

    def sample_uniform(self, n, rng):
        """Draw n points uniformly from the box."""
        u = rng.random((n, self.dim))
        return self.lower + u * self.extent

    def axis_distance(self, a, b):
        """Per-axis distances between two point sets, circular on periodic axes."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        delta = np.abs(a - b)
        out = np.array(delta, dtype=float)
        flat = out.reshape(-1, self.dim)
        for k, mode in enumerate(self.boundary_modes):
            if mode == PERIODIC:
                span = self.upper[k] - self.lower[k]
                flat[:, k] = np.minimum(flat[:, k], span - flat[:, k])
        return out


def torus_domain(dim=2, circumference=2.0 * np.pi):
    """The dim-torus [0, circumference)^dim with periodic wrapping."""
    return DesignDomain(
        np.zeros(dim), np.full(dim, circumference), (PERIODIC,) * dim
    )


def box_domain(lower, upper):
    """A clamped box; coordinates outside are clipped back to the faces."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    return DesignDomain(lower, upper, (CLAMP,) * lower.size)


def domain_project(domain, theta):
    """Project a point (or batch) back into the domain; see DesignDomain.project."""
    return domain.project(theta)


class ExperimentModel(ABC):
    """Contract for a continuously indexed experiment matrix.

    A model maps a design point theta in its domain to a length-d row and to
    the row's theta-Jacobian of shape (d, p).  Both are deterministic
    functions of theta.  Subclasses may override the batch methods with
    vectorized implementations; results must match the scalar ones.
    """

    dim_d: int
    domain: DesignDomain

    @abstractmethod
    def row(self, theta):
        """Experiment row a(theta), shape (d,)."""

    @abstractmethod
    def row_jacobian(self, theta):
        """d a / d theta, shape (d, p)."""

    def rows(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        return np.stack([self.row(t) for t in thetas])

    def row_jacobians(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        return np.stack([self.row_jacobian(t) for t in thetas])


class SpdFactor:
    """Cholesky handle for an SPD information matrix.

    Supports M x = b and M^2 x = b through factored solves; the inverse is
    never formed for solve paths.  trace_inverse and log_det are computed once
    at construction.
    """

    def __init__(self, matrix, cho, condition_estimate):
        self._cho = cho
        self.condition_estimate = condition_estimate
        d = matrix.shape[0]
        self.dim = d
        self.log_det = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
        self.trace_inverse = float(np.trace(cho_solve(cho, np.eye(d))))

    def solve(self, b):
        """Solve M x = b for a vector or a stack of columns."""
        return cho_solve(self._cho, np.asarray(b, dtype=float))

    def solve_squared(self, b):
        """Solve M^2 x = b via two triangular solves."""
        return cho_solve(self._cho, cho_solve(self._cho, np.asarray(b, dtype=float)))


class InformationMatrix:
    """Dense symmetric d x d second-moment matrix of experiment rows.

    The stored matrix is explicitly symmetrized, which makes the downstream
    factorization deterministic.  `factor` and `condition_estimate` are filled
    lazily by factorize().
    """

    def __init__(self, m):
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("information matrix must be square")
        self.m = 0.5 * (m + m.T)
        self.factor = None
        self.condition_estimate = None

    @property
    def dim(self):
        return self.m.shape[0]


def assemble_information_matrix(model, ensemble):
    """Sampled second moment M = (1/N) sum_i a(theta_i)^T a(theta_i)."""
    ensemble = np.asarray(ensemble, dtype=float)
    if ensemble.size == 0:
        raise ValueError("empty ensemble")
    rows = model.rows(ensemble)
    m = rows.T @ rows / rows.shape[0]
    return InformationMatrix(m)


def factorize(info):
    """Factorize an InformationMatrix, returning (and caching) an SpdFactor.

    Raises SingularInformationMatrix when the condition estimate reaches
    CONDITION_LIMIT or the Cholesky factorization hits a non-positive pivot;
    either way the design fails to span all d directions at working precision.
    """
    if info.factor is not None:
        return info.factor
    eigs = np.linalg.eigvalsh(info.m)
    lo, hi = eigs[0], eigs[-1]
    cond = np.inf if lo <= 0.0 else hi / lo
    info.condition_estimate = float(cond)
    if not np.isfinite(cond) or cond >= CONDITION_LIMIT:
        raise SingularInformationMatrix(
            f"information matrix condition estimate {cond:.3e} >= {CONDITION_LIMIT:.0e}"
        )
    try:
        cho = cho_factor(info.m, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - cond gate first
        raise SingularInformationMatrix(str(exc)) from exc
    info.factor = SpdFactor(info.m, cho, float(cond))
    return info.factor
