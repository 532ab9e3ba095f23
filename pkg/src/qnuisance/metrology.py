"""Random-magnetic-field dephasing models and their Fisher-information dynamics.

Three noise variants share the Bloch-vector solution
    s(t) = (exp(-Gamma1) R(Omega) s_planar, exp(-Gamma3) s_z)
and differ in the master-equation kernels:

  1  finite-memory kernels  dw(t), g1(t) = b^2 int exp(-G s){sin, cos}(w s) ds,
     g3(t) = b^2 int exp(-G s) ds  (elementary antiderivatives, evaluated
     through the complex integral of exp((-G + i w) s))
  2  Born-Markov constants  dw = b^2 w/(G^2+w^2), g1 = b^2 G/(G^2+w^2), g3 = b^2/G
  3  parallel-noise limit   dw = 0, g1 = 0, g3 = b^2/G

Fisher matrices are assembled in the observable coordinates
(Gamma1, Omega, Gamma3), where the SLD Fisher matrix of the qubit has the
closed-form inverse [[1/a^2-1, 0, -1], [0, 1/a^2, 0], [-1, 0, 1/b^2-1]]
(a, b the planar and axial Bloch amplitudes), and mapped to the physical
parameters (omega, b^2, Gamma) with the kernel Jacobian. This keeps the
deeply decayed regime (amplitudes ~1e-27) inside double precision.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadFixedParameter, OutOfDomain
from .tolerances import DEFAULT, Tolerances

VARIANTS = (1, 2, 3)
STATUS_OK = "ok"
STATUS_RANK = "RankDeficientState"
STATUS_SINGULAR = "SingularFisher"


@dataclass(frozen=True)
class NoiseModelSpec:
    """Physical configuration of one noise variant."""
    variant: int
    omega: float
    b2: float
    gamma_corr: float
    s0: tuple

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise BadFixedParameter(f"variant must be one of {VARIANTS}, got {self.variant}")
        if self.omega <= 0.0:
            raise BadFixedParameter("omega must be positive")
        if self.b2 < 0.0:
            raise BadFixedParameter("b^2 must be nonnegative")
        if self.gamma_corr <= 0.0:
            raise BadFixedParameter("noise correlation rate must be positive")
        s0 = tuple(float(x) for x in self.s0)
        if len(s0) != 3 or np.linalg.norm(s0) > 1.0 + 1e-12:
            raise BadFixedParameter("initial Bloch vector must lie in the unit ball")
        object.__setattr__(self, "s0", s0)

    @property
    def n_params(self):
        # variant 3 depends on (omega, gamma = b^2 / Gamma) only
        return 2 if self.variant == 3 else 3


@dataclass(frozen=True)
class DecayState:
    """Accumulated damping exponents and phase at time t."""
    Gamma1: float
    Gamma3: float
    Omega: float


def kernels(spec: NoiseModelSpec, t: float):
    """Instantaneous kernels (delta_omega, gamma1, gamma3) at time t."""
    if t < 0.0:
        raise OutOfDomain("time must be nonnegative")
    om, b2, G = spec.omega, spec.b2, spec.gamma_corr
    if spec.variant == 1:
        z = complex(-G, om)
        E = (np.exp(z * t) - 1.0) / z
        return b2 * E.imag, b2 * E.real, b2 * (1.0 - np.exp(-G * t)) / G
    if spec.variant == 2:
        den = G * G + om * om
        return b2 * om / den, b2 * G / den, b2 / G
    return 0.0, 0.0, b2 / G


def _decay_and_jacobian(spec: NoiseModelSpec, t: float):
    """DecayState plus J[k, i] = d(Gamma1, Omega, Gamma3)_k / d(param_i)."""
    om, b2, G = spec.omega, spec.b2, spec.gamma_corr
    if spec.variant == 1:
        z = complex(-G, om)
        ezt = np.exp(z * t)
        E = (ezt - 1.0) / z
        D = t * ezt / z - E / z                 # dE/dz
        Q = (E - t) / z                          # int_0^t E(s) ds
        dQdz = (D * z - E + t) / (z * z)
        ex = np.exp(-G * t)
        g3_unit = 2.0 * (t / G - (1.0 - ex) / G ** 2)       # Gamma3 / b^2
        Gamma3 = b2 * g3_unit
        Gamma1 = b2 * Q.real + 0.5 * Gamma3
        Omega = om * t + b2 * Q.imag
        dG3 = np.array([0.0, g3_unit,
                        2.0 * b2 * (-t / G ** 2 - t * ex / G ** 2 + 2.0 * (1.0 - ex) / G ** 3)])
        dQ_om = 1j * dQdz
        dQ_G = -dQdz
        dG1 = np.array([b2 * dQ_om.real,
                        Q.real + 0.5 * g3_unit,
                        b2 * dQ_G.real + 0.5 * dG3[2]])
        dOm = np.array([t + b2 * dQ_om.imag, Q.imag, b2 * dQ_G.imag])
        jac = np.vstack([dG1, dOm, dG3])
    elif spec.variant == 2:
        den = G * G + om * om
        g1, g3, dw = b2 * G / den, b2 / G, b2 * om / den
        Gamma1, Gamma3, Omega = (g1 + g3) * t, 2.0 * g3 * t, (om + dw) * t
        dg1 = np.array([-2.0 * b2 * G * om / den ** 2, G / den, b2 * (om * om - G * G) / den ** 2])
        dg3 = np.array([0.0, 1.0 / G, -b2 / G ** 2])
        ddw = np.array([b2 * (G * G - om * om) / den ** 2, om / den, -2.0 * b2 * om * G / den ** 2])
        jac = np.vstack([(dg1 + dg3) * t, ddw * t, 2.0 * dg3 * t])
        jac[1, 0] += t
    else:
        # parameters (omega, gamma) with gamma = b^2 / Gamma
        gamma = b2 / G
        Gamma1, Gamma3, Omega = gamma * t, 2.0 * gamma * t, om * t
        jac = np.array([[0.0, t], [t, 0.0], [0.0, 2.0 * t]])
    return DecayState(Gamma1=float(Gamma1), Gamma3=float(Gamma3), Omega=float(Omega)), jac


def decay_state(spec: NoiseModelSpec, t: float) -> DecayState:
    if t < 0.0:
        raise OutOfDomain("time must be nonnegative")
    return _decay_and_jacobian(spec, t)[0]


def evolve_bloch(spec: NoiseModelSpec, t: float):
    """Bloch vector at time t: damped planar rotation plus damped axial component."""
    state = decay_state(spec, t)
    c, s = np.cos(state.Omega), np.sin(state.Omega)
    s1, s2, s3 = spec.s0
    e1, e3 = np.exp(-state.Gamma1), np.exp(-state.Gamma3)
    return np.array([e1 * (c * s1 + s * s2), e1 * (-s * s1 + c * s2), e3 * s3])


def bloch_derivatives(spec: NoiseModelSpec, t: float):
    """Bloch vector and its closed-form parameter derivatives at time t.

    Columns follow the variant's parameter order: (omega, b^2, Gamma) for
    variants 1-2, (omega, gamma) for variant 3.
    """
    state, jac = _decay_and_jacobian(spec, t)
    c, s = np.cos(state.Omega), np.sin(state.Omega)
    s1, s2, s3 = spec.s0
    u = c * s1 + s * s2
    w = -s * s1 + c * s2
    e1, e3 = np.exp(-state.Gamma1), np.exp(-state.Gamma3)
    sv = np.array([e1 * u, e1 * w, e3 * s3])
    n_params = jac.shape[1]
    ds = np.empty((3, n_params))
    for i in range(n_params):
        d_g1, d_om, d_g3 = jac[0, i], jac[1, i], jac[2, i]
        ds[0, i] = e1 * (-d_g1 * u + d_om * w)
        ds[1, i] = e1 * (-d_g1 * w - d_om * u)
        ds[2, i] = -d_g3 * e3 * s3
    return sv, ds


def _observable_fisher(a2, b2_ax):
    """SLD Fisher matrix in (Gamma1, Omega, Gamma3) coordinates and its inverse.

    a2, b2_ax are the squared planar and axial Bloch amplitudes; the inverse
    is closed-form and exact, which keeps tiny amplitudes representable.
    """
    D = 1.0 - a2 - b2_ax
    G_obs = np.array([
        [a2 + a2 * a2 / D, 0.0, a2 * b2_ax / D],
        [0.0, a2, 0.0],
        [a2 * b2_ax / D, 0.0, b2_ax + b2_ax * b2_ax / D],
    ])
    G_obs_inv = np.array([
        [1.0 / a2 - 1.0, 0.0, -1.0],
        [0.0, 1.0 / a2, 0.0],
        [-1.0, 0.0, 1.0 / b2_ax - 1.0],
    ])
    return G_obs, G_obs_inv


def fisher_point(spec: NoiseModelSpec, t: float, tol: Tolerances = DEFAULT):
    """(g11, g11_partial, status) for the parameter of interest omega at time t.

    g11 is the (1,1) entry of the SLD Fisher matrix over the physical
    parameters; g11_partial = 1/(G^-1)_11 is the information left when the
    noise parameters are nuisance. Degenerate points report a status instead
    of raising, so time series can continue across them.
    """
    if t <= 0.0:
        raise OutOfDomain("Fisher dynamics need t > 0")
    state, jac = _decay_and_jacobian(spec, t)
    s1, s2, s3 = spec.s0
    r_pl = np.hypot(s1, s2)
    a = np.exp(-state.Gamma1) * r_pl
    b_ax = np.exp(-state.Gamma3) * s3
    a2, b2_ax = a * a, b_ax * b_ax
    norm2 = a2 + b2_ax
    if norm2 >= (1.0 - 2.0 * tol.rank_deficient) ** 2:
        return np.nan, np.nan, STATUS_RANK

    if spec.variant == 3:
        if a2 == 0.0:
            return np.nan, np.nan, STATUS_SINGULAR
        # planar channels only couple to (omega, gamma); exact diagonal G
        g_omega = (t * t) * a2
        g_gamma = (t * t) * (a2 + 4.0 * b2_ax + (a2 + 2.0 * b2_ax) ** 2 / (1.0 - norm2))
        if g_gamma <= 0.0 or not np.isfinite(g_gamma):
            return np.nan, np.nan, STATUS_SINGULAR
        return g_omega, g_omega, STATUS_OK

    if a2 == 0.0 or b2_ax == 0.0:
        # a dark channel makes the 3-parameter model singular
        return np.nan, np.nan, STATUS_SINGULAR
    with np.errstate(over="ignore", divide="ignore"):
        G_obs, G_obs_inv = _observable_fisher(a2, b2_ax)
    if not np.all(np.isfinite(G_obs_inv)):
        return np.nan, np.nan, STATUS_SINGULAR
    if np.linalg.cond(jac) > tol.singular_cond:
        return np.nan, np.nan, STATUS_SINGULAR
    g11 = float(jac[:, 0] @ G_obs @ jac[:, 0])
    jac_inv = np.linalg.inv(jac)
    g_sup_11 = float(jac_inv[0] @ G_obs_inv @ jac_inv[0])
    if g_sup_11 <= 0.0 or not np.isfinite(g_sup_11) or g11 <= 0.0:
        return np.nan, np.nan, STATUS_SINGULAR
    return g11, 1.0 / g_sup_11, STATUS_OK


@dataclass(frozen=True)
class FisherTimeSeries:
    """Full and nuisance-limited Fisher information about omega along a time grid."""
    times: np.ndarray
    g11: np.ndarray
    g11_partial: np.ndarray
    g11_over_t2: np.ndarray
    g11_partial_over_t2: np.ndarray
    status: tuple


def fisher_time_series(spec: NoiseModelSpec, times, tol: Tolerances = DEFAULT) -> FisherTimeSeries:
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0.0):
        raise OutOfDomain("all scan times must be positive")
    g11 = np.empty_like(times)
    partial = np.empty_like(times)
    status = []
    for i, t in enumerate(times):
        g, gp, st = fisher_point(spec, float(t), tol)
        g11[i], partial[i] = g, gp
        status.append(st)
    t2 = times * times
    return FisherTimeSeries(times=times, g11=g11, g11_partial=partial,
                            g11_over_t2=g11 / t2, g11_partial_over_t2=partial / t2,
                            status=tuple(status))


FIG1_PRESETS = {
    "fig1a": (1e3, 1e2, 10.0),
    "fig1b": (1e2, 1e2, 10.0),
    "fig1c": (1e2, 1e2, 1.0),
}
FIG1_S0 = (np.sqrt(0.91), 0.0, 0.3)


def preset_spec(name, variant) -> NoiseModelSpec:
    """Noise spec for one of the figure presets."""
    if name not in FIG1_PRESETS:
        raise BadFixedParameter(f"unknown preset {name!r}; expected one of {sorted(FIG1_PRESETS)}")
    om, b2, G = FIG1_PRESETS[name]
    return NoiseModelSpec(variant=variant, omega=om, b2=b2, gamma_corr=G, s0=FIG1_S0)


def default_time_grid(gamma_corr, count=200):
    """Logarithmic grid 0.01/Gamma .. 30/Gamma covering the memory-effect
    window through the Markovian regime."""
    return np.geomspace(0.01 / gamma_corr, 30.0 / gamma_corr, count)
