"""Parametric families of qubit states with an interest/nuisance partition.

Built-in models (named A-F):

  A  (I + t1 s1 + t2 s2)/2                  interest t1, nuisance t2
  B  (I + t1 s1 + t2 s2 + t3 s3)/2          interest t1, nuisance (t2, t3)
  C  (I + t1 s1 + t2 s2 + t0 s3)/2          fixed t0; interest t1, nuisance t2
  D  same family as B                        interest (t1, t2), nuisance t3
  E  (I + t1 cos(t2) s1 + t1 sin(t2) s2)/2  interest t1, nuisance phase t2
  F  Bloch vector exp(-t2) R(t1) s0          interest phase t1, nuisance damping t2

Parameter orthogonalization keeps the parameters of interest fixed while
remapping nuisance coordinates so the SLD Fisher matrix becomes block
diagonal; the free scalar function is tanh (smooth bijection onto (-1, 1)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    BadFixedParameter,
    OutOfDomain,
    SingularJacobian,
    StepExitsDomain,
    UnknownModel,
)
from .linalg import PAULI, bloch_state, hermitize
from .tolerances import DEFAULT, Tolerances

BUILTIN_NAMES = ("A", "B", "C", "D", "E", "F")


@dataclass(frozen=True)
class ParametricModel:
    """Differentiable map theta -> density matrix with an interest/nuisance split.

    The first m parameters are of interest, the remaining n - m are nuisance.
    deriv_fn, when present, returns the n closed-form Hermitian derivatives.
    """
    n: int
    m: int
    state_fn: Callable[[np.ndarray], np.ndarray]
    domain: Callable[[np.ndarray], bool]
    deriv_fn: Optional[Callable[[np.ndarray], list]] = None
    name: str = "custom"
    dim: int = 2

    def partition(self):
        return self.m, self.n - self.m


@dataclass(frozen=True)
class Reparametrization:
    """Map xi -> theta preserving the parameters of interest (xi_I = theta_I).

    jacobian(xi)[i, j] = d theta_i / d xi_j; its upper-left m x m block must be
    the identity. inverse, when present, maps theta back to xi.
    """
    m: int
    forward: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None
    domain: Optional[Callable[[np.ndarray], bool]] = None


def check_bloch(s, full_rank=False, tol: Tolerances = DEFAULT):
    s = np.asarray(s, dtype=float)
    if s.shape != (3,):
        raise BadFixedParameter(f"Bloch vector needs 3 components, got shape {s.shape}")
    r = np.linalg.norm(s)
    if r > 1.0 + tol.domain_margin or (full_rank and r >= 1.0 - tol.domain_margin):
        raise BadFixedParameter(f"Bloch norm {r:.6f} outside the admissible ball")
    return s


def evaluate(model: ParametricModel, theta, tol: Tolerances = DEFAULT):
    """Density matrix at theta; raises OutOfDomain off the parameter set."""
    theta = _check_theta(model, theta)
    return model.state_fn(theta)


def _check_theta(model, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (model.n,):
        raise OutOfDomain(f"model {model.name} expects {model.n} parameters, got {theta.shape}")
    if not model.domain(theta):
        raise OutOfDomain(f"theta {theta.tolist()} outside the domain of model {model.name}")
    return theta


def derivatives(model: ParametricModel, theta, tol: Tolerances = DEFAULT):
    """The n parameter derivatives of the state at theta.

    Uses the model's closed form when available, otherwise central finite
    differences with step 1e-5 * max(1, |theta_i|); the step shrinks once by
    10x if the stencil exits the domain.
    """
    theta = _check_theta(model, theta)
    if model.deriv_fn is not None:
        return [hermitize(d) for d in model.deriv_fn(theta)]
    return finite_difference_derivatives(model, theta, tol)


def finite_difference_derivatives(model: ParametricModel, theta, tol: Tolerances = DEFAULT):
    theta = _check_theta(model, theta)
    out = []
    for i in range(model.n):
        h = tol.fd_step * max(1.0, abs(theta[i]))
        for attempt in range(2):
            tp = theta.copy(); tp[i] += h
            tm = theta.copy(); tm[i] -= h
            if model.domain(tp) and model.domain(tm):
                break
            h /= 10.0
        else:
            raise StepExitsDomain(
                f"finite-difference stencil for parameter {i} exits the domain at {theta.tolist()}")
        if not (model.domain(tp) and model.domain(tm)):
            raise StepExitsDomain(
                f"finite-difference stencil for parameter {i} exits the domain at {theta.tolist()}")
        out.append(hermitize((model.state_fn(tp) - model.state_fn(tm)) / (2.0 * h)))
    return out


# --- built-in models ---------------------------------------------------------

def _linear_bloch_model(name, m, axes, fixed_component=None, margin=1e-9):
    """Stokes-parameter families: Bloch components on the given axes, optional fixed s3."""
    n = len(axes)
    fixed = 0.0 if fixed_component is None else float(fixed_component)
    cap = 1.0 - fixed * fixed

    def state_fn(theta):
        s = np.zeros(3)
        for value, axis in zip(theta, axes):
            s[axis] = value
        if fixed_component is not None:
            s[2] = fixed
        return bloch_state(s)

    def deriv_fn(theta):
        return [0.5 * PAULI[axis] for axis in axes]

    def domain(theta):
        return float(theta @ theta) < cap - margin

    return ParametricModel(n=n, m=m, state_fn=state_fn, deriv_fn=deriv_fn,
                           domain=domain, name=name)


def _model_e(margin=1e-9):
    def state_fn(theta):
        r, phi = theta
        return bloch_state([r * np.cos(phi), r * np.sin(phi), 0.0])

    def deriv_fn(theta):
        r, phi = theta
        d_r = 0.5 * (np.cos(phi) * PAULI[0] + np.sin(phi) * PAULI[1])
        d_phi = 0.5 * r * (-np.sin(phi) * PAULI[0] + np.cos(phi) * PAULI[1])
        return [d_r, d_phi]

    def domain(theta):
        # phase is periodic; only the radius is constrained
        return margin < theta[0] < 1.0 - margin

    return ParametricModel(n=2, m=1, state_fn=state_fn, deriv_fn=deriv_fn,
                           domain=domain, name="E")


def _rot(phase):
    c, s = np.cos(phase), np.sin(phase)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def _drot(phase):
    c, s = np.cos(phase), np.sin(phase)
    return np.array([[-s, c, 0.0], [-c, -s, 0.0], [0.0, 0.0, 0.0]])


def _model_f(s0, margin=1e-9):
    s0 = check_bloch(s0)
    if s0[0] ** 2 + s0[1] ** 2 <= 0.0:
        raise BadFixedParameter("initial Bloch vector needs a nonzero planar component")
    r0 = float(np.linalg.norm(s0))

    def bloch(theta):
        return np.exp(-theta[1]) * (_rot(theta[0]) @ s0)

    def state_fn(theta):
        return bloch_state(bloch(theta))

    def deriv_fn(theta):
        ds1 = np.exp(-theta[1]) * (_drot(theta[0]) @ s0)
        ds2 = -bloch(theta)
        return [0.5 * sum(v[k] * PAULI[k] for k in range(3)) for v in (ds1, ds2)]

    def domain(theta):
        return theta[1] >= 0.0 and np.exp(-theta[1]) * r0 < 1.0 - margin

    return ParametricModel(n=2, m=1, state_fn=state_fn, deriv_fn=deriv_fn,
                           domain=domain, name="F")


def make_builtin(name, fixed=None, tol: Tolerances = DEFAULT) -> ParametricModel:
    """Construct one of the built-in models A-F.

    fixed carries the model's non-estimated data: the s3 component for C
    (required, |t0| < 1 and t0 != 0) and the initial Bloch vector for F
    (default (1, 0, 0)).
    """
    margin = tol.domain_margin
    if name == "A":
        return _linear_bloch_model("A", 1, (0, 1), margin=margin)
    if name == "B":
        return _linear_bloch_model("B", 1, (0, 1, 2), margin=margin)
    if name == "C":
        if fixed is None:
            raise BadFixedParameter("model C needs the fixed s3 component")
        t0 = float(np.atleast_1d(fixed)[0])
        if not (0.0 < abs(t0) < 1.0):
            raise BadFixedParameter(f"model C needs 0 < |t0| < 1, got {t0}")
        return _linear_bloch_model("C", 1, (0, 1), fixed_component=t0, margin=margin)
    if name == "D":
        model = _linear_bloch_model("D", 2, (0, 1, 2), margin=margin)
        return model
    if name == "E":
        return _model_e(margin=margin)
    if name == "F":
        s0 = (1.0, 0.0, 0.0) if fixed is None else fixed
        return _model_f(s0, margin=margin)
    raise UnknownModel(f"unknown model {name!r}; expected one of {BUILTIN_NAMES}")


# --- parameter orthogonalization ---------------------------------------------

def orthogonalize(model: ParametricModel, repar: Reparametrization,
                  tol: Tolerances = DEFAULT) -> ParametricModel:
    """Compose the model with a nuisance reparametrization xi -> theta.

    The returned model evaluates state_fn(forward(xi)) and chains derivatives
    through the Jacobian; the Jacobian must keep the interest block at the
    identity and stay invertible on the domain.
    """
    if repar.m != model.m:
        raise SingularJacobian(
            f"reparametrization preserves {repar.m} interest parameters, model has {model.m}")

    def checked_jacobian(xi):
        jac = np.asarray(repar.jacobian(xi), dtype=float)
        if jac.shape != (model.n, model.n):
            raise SingularJacobian(f"jacobian shape {jac.shape}, expected {(model.n, model.n)}")
        if np.max(np.abs(jac[:model.m, :model.m] - np.eye(model.m))) > 1e-10:
            raise SingularJacobian("interest block of the jacobian is not the identity")
        if abs(np.linalg.det(jac)) <= 1e-12:
            raise SingularJacobian(f"jacobian singular at xi={np.asarray(xi).tolist()}")
        return jac

    def state_fn(xi):
        return model.state_fn(repar.forward(xi))

    base_derivs = model.deriv_fn

    def deriv_fn(xi):
        jac = checked_jacobian(xi)
        theta = repar.forward(xi)
        if base_derivs is not None:
            d_theta = base_derivs(theta)
        else:
            d_theta = finite_difference_derivatives(model, theta, tol)
        return [sum(jac[i, j] * d_theta[i] for i in range(model.n)) for j in range(model.n)]

    def domain(xi):
        xi = np.asarray(xi, dtype=float)
        if repar.domain is not None and not repar.domain(xi):
            return False
        return model.domain(repar.forward(xi))

    return ParametricModel(n=model.n, m=model.m, state_fn=state_fn, deriv_fn=deriv_fn,
                           domain=domain, name=f"{model.name}-orth", dim=model.dim)


def _tanh_pair(x):
    c = np.tanh(x)
    return c, 1.0 - c * c      # tanh and its derivative


def builtin_orthogonalization(name, fixed=None) -> Reparametrization:
    """The tanh-based orthogonalizing reparametrizations for models A-D."""
    if name == "A":
        def forward(xi):
            c, _ = _tanh_pair(xi[1])
            return np.array([xi[0], c * np.sqrt(1.0 - xi[0] ** 2)])

        def jacobian(xi):
            c, dc = _tanh_pair(xi[1])
            root = np.sqrt(1.0 - xi[0] ** 2)
            return np.array([[1.0, 0.0],
                             [-c * xi[0] / root, dc * root]])

        def inverse(theta):
            root = np.sqrt(1.0 - theta[0] ** 2)
            return np.array([theta[0], np.arctanh(theta[1] / root)])

        def domain(xi):
            return abs(xi[0]) < 1.0 - 1e-9

        return Reparametrization(1, forward, jacobian, inverse, domain)

    if name == "B":
        def forward(xi):
            c2, _ = _tanh_pair(xi[1])
            c3, _ = _tanh_pair(xi[2])
            root = np.sqrt(1.0 - xi[0] ** 2)
            return np.array([xi[0], c2 * root, c3 * root])

        def jacobian(xi):
            c2, dc2 = _tanh_pair(xi[1])
            c3, dc3 = _tanh_pair(xi[2])
            root = np.sqrt(1.0 - xi[0] ** 2)
            return np.array([[1.0, 0.0, 0.0],
                             [-c2 * xi[0] / root, dc2 * root, 0.0],
                             [-c3 * xi[0] / root, 0.0, dc3 * root]])

        def inverse(theta):
            root = np.sqrt(1.0 - theta[0] ** 2)
            return np.array([theta[0],
                             np.arctanh(theta[1] / root),
                             np.arctanh(theta[2] / root)])

        def domain(xi):
            return abs(xi[0]) < 1.0 - 1e-9

        return Reparametrization(1, forward, jacobian, inverse, domain)

    if name == "C":
        if fixed is None:
            raise BadFixedParameter("orthogonalization of model C needs the fixed s3 component")
        t0 = float(np.atleast_1d(fixed)[0])
        cap = 1.0 - t0 * t0

        def forward(xi):
            c, _ = _tanh_pair(xi[1])
            return np.array([xi[0], c * np.sqrt(cap - xi[0] ** 2)])

        def jacobian(xi):
            c, dc = _tanh_pair(xi[1])
            root = np.sqrt(cap - xi[0] ** 2)
            return np.array([[1.0, 0.0],
                             [-c * xi[0] / root, dc * root]])

        def inverse(theta):
            root = np.sqrt(cap - theta[0] ** 2)
            return np.array([theta[0], np.arctanh(theta[1] / root)])

        def domain(xi):
            return xi[0] ** 2 < cap - 1e-9

        return Reparametrization(1, forward, jacobian, inverse, domain)

    if name == "D":
        def forward(xi):
            c, _ = _tanh_pair(xi[2])
            return np.array([xi[0], xi[1], c * np.sqrt(1.0 - xi[0] ** 2 - xi[1] ** 2)])

        def jacobian(xi):
            c, dc = _tanh_pair(xi[2])
            root = np.sqrt(1.0 - xi[0] ** 2 - xi[1] ** 2)
            return np.array([[1.0, 0.0, 0.0],
                             [0.0, 1.0, 0.0],
                             [-c * xi[0] / root, -c * xi[1] / root, dc * root]])

        def inverse(theta):
            root = np.sqrt(1.0 - theta[0] ** 2 - theta[1] ** 2)
            return np.array([theta[0], theta[1], np.arctanh(theta[2] / root)])

        def domain(xi):
            return xi[0] ** 2 + xi[1] ** 2 < 1.0 - 1e-9

        return Reparametrization(2, forward, jacobian, inverse, domain)

    raise UnknownModel(f"no built-in orthogonalization for model {name!r}")


def identity_reparametrization(n, m) -> Reparametrization:
    eye = np.eye(n)
    return Reparametrization(m, lambda xi: np.asarray(xi, dtype=float).copy(),
                             lambda xi: eye.copy(),
                             lambda theta: np.asarray(theta, dtype=float).copy())
