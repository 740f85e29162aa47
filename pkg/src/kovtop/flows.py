"""Continuous systems and the fixed-step RK4 reference integrator.

The reference integrator is the convergence oracle for every discrete map in
the package; it is deliberately fixed-step (deterministic, reproducible) with
accuracy controlled by dt alone.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .core import QuadraticField, TrajectoryRecord, as_state
from .errors import BlowupError, DimensionError, ParameterError

_DUMMY_COEFFS = np.zeros((1, 1, 1))


@dataclass(frozen=True)
class FlowSpec:
    """A named right-hand side together with the data the kernels need.

    kind is one of "scaled-quadratic" (dy_i/dt = y_i(s - alpha y_i) with s a
    polynomial in the elementary symmetric functions), "product-complement"
    (dx_i/dt = prod_{j != i} x_j), "quadratic-field", or "custom" (python
    callable only, integrated without the compiled kernels).
    """

    name: str
    dim: int
    rhs: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    alpha: float = 2.0
    s_coeffs: tuple[float, ...] = ()
    field: QuadraticField | None = None

    def __call__(self, y) -> np.ndarray:
        return np.asarray(self.rhs(as_state(y, self.dim)), dtype=float)


def generalized_kovalevskaya(N: int, alpha: float = 2.0,
                             s_coeffs: Sequence[float] | None = None) -> FlowSpec:
    """dy_i/dt = y_i(-alpha*y_i + s) in N variables.

    By default s = y_1 + ... + y_N.  Passing `s_coeffs` replaces s by the
    symmetric polynomial sum_k s_coeffs[k-1]*e_k(y); the conserved-ratio family
    H_ij/H_kl survives any such choice.  alpha == N is rejected because the
    power-law integral family divides by N - alpha.
    """
    if N < 3:
        raise DimensionError("generalized Kovalevskaya flow needs N >= 3")
    if alpha == N:
        raise ParameterError(f"alpha must differ from N (got alpha = N = {N})")
    if s_coeffs is None:
        sc = np.zeros(N)
        sc[0] = 1.0
        name = f"gen-kov(N={N},alpha={alpha:g})"
    else:
        sc = np.asarray(list(s_coeffs), dtype=float)
        if sc.shape[0] != N:
            raise ParameterError("s_coeffs must list one coefficient per e_1..e_N")
        name = f"gen-kov(N={N},alpha={alpha:g},custom-s)"

    def rhs(y):
        return kernels._rhs_scaled_quadratic(np.asarray(y, float), alpha, sc)

    return FlowSpec(name=name, dim=N, rhs=rhs, kind="scaled-quadratic",
                    alpha=alpha, s_coeffs=tuple(sc))


def kovalevskaya3() -> FlowSpec:
    """The three-dimensional flow dy_i/dt = y_i(-y_i + y_j + y_k)."""
    flow = generalized_kovalevskaya(3, 2.0)
    return FlowSpec(name="kov3", dim=3, rhs=flow.rhs, kind="scaled-quadratic",
                    alpha=2.0, s_coeffs=flow.s_coeffs)


def generalized_euler(N: int) -> FlowSpec:
    """dx_i/dt = prod_{j != i} x_j.  Degree N-1, so only the N = 3 case is a
    quadratic field."""
    if N < 3:
        raise DimensionError("generalized Euler flow needs N >= 3")

    def rhs(x):
        return kernels._rhs_product_complement(np.asarray(x, float))

    return FlowSpec(name=f"gen-euler(N={N})", dim=N, rhs=rhs,
                    kind="product-complement")


def euler_top3() -> FlowSpec:
    """The Euler top dx_i/dt = x_j x_k."""
    flow = generalized_euler(3)
    return FlowSpec(name="euler3", dim=3, rhs=flow.rhs, kind="product-complement")


def quadratic_flow(field: QuadraticField, name: str = "quadratic") -> FlowSpec:
    def rhs(y):
        return kernels._rhs_quadratic_field(field.coeffs, np.asarray(y, float))

    return FlowSpec(name=name, dim=field.dim, rhs=rhs, kind="quadratic-field",
                    field=field)


def kovalevskaya_field(N: int = 3, alpha: float = 2.0) -> QuadraticField:
    """Coefficient tensor of the generalized Kovalevskaya flow: the monomial
    y_i^2 carries 1 - alpha in row i, every mixed y_i*y_j carries 1."""
    terms: dict[tuple[int, int, int], float] = {}
    for i in range(N):
        terms[(i, i, i)] = 1.0 - alpha
        for j in range(N):
            if j != i:
                terms[(i, i, j)] = 1.0
    return QuadraticField.from_terms(N, terms)


def euler_field() -> QuadraticField:
    """Coefficient tensor of the Euler top."""
    return QuadraticField.from_terms(3, {(0, 1, 2): 1.0, (1, 2, 0): 1.0, (2, 0, 1): 1.0})


def _steps_for(t_end: float, dt: float) -> int:
    if dt <= 0:
        raise ParameterError("dt must be positive")
    if t_end < 0:
        raise ParameterError("t_end must be nonnegative")
    n = round(t_end / dt) if t_end > 0 else 0
    if abs(n * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ParameterError(f"dt={dt} does not divide t_end={t_end}")
    return n


def integrate_reference(flow: FlowSpec, y0, t_end: float, dt: float) -> TrajectoryRecord:
    """Fixed-step RK4 trajectory sampled every step.

    Raises BlowupError (carrying the last valid time) if the state leaves the
    finite region |y_i| <= 1e12; these flows have finite-time poles, so the
    hard cap is mandatory.
    """
    y0 = as_state(y0, flow.dim)
    nsteps = _steps_for(t_end, dt)
    traj, end = rk4_states(flow, y0, dt, nsteps)
    if end < nsteps:
        raise BlowupError(
            f"trajectory of {flow.name} left the finite region at t = {(end + 1) * dt:g}",
            last_time=end * dt, last_state=traj[end])
    times = dt * np.arange(nsteps + 1)
    return TrajectoryRecord(system=flow.name, times=times, states=np.asarray(traj))


def rk4_states(flow: FlowSpec, y0, dt: float, nsteps: int) -> tuple[np.ndarray, int]:
    """Non-raising RK4 iteration used by the drift harness: returns
    (states, last_step) with last_step < nsteps on blowup."""
    y0 = as_state(y0, flow.dim)
    if flow.kind == "scaled-quadratic":
        traj, end = kernels.rk4_orbit(
            kernels.FLOW_SCALED_QUAD, y0, flow.alpha, np.asarray(flow.s_coeffs),
            _DUMMY_COEFFS, dt, nsteps, kernels.BLOWUP_CAP)
    elif flow.kind == "product-complement":
        traj, end = kernels.rk4_orbit(
            kernels.FLOW_PRODUCT_COMPLEMENT, y0, 0.0, np.zeros(1),
            _DUMMY_COEFFS, dt, nsteps, kernels.BLOWUP_CAP)
    elif flow.kind == "quadratic-field":
        traj, end = kernels.rk4_orbit(
            kernels.FLOW_QUAD_FIELD, y0, 0.0, np.zeros(1),
            flow.field.coeffs, dt, nsteps, kernels.BLOWUP_CAP)
    else:
        traj, end = _rk4_python(flow.rhs, y0, dt, nsteps)
    return np.asarray(traj), int(end)


def _rk4_python(rhs, y0, dt, nsteps):
    traj = np.empty((nsteps + 1, y0.shape[0]))
    traj[0] = y0
    y = y0.copy()
    end = nsteps
    for k in range(nsteps):
        k1 = np.asarray(rhs(y), float)
        k2 = np.asarray(rhs(y + 0.5 * dt * k1), float)
        k3 = np.asarray(rhs(y + 0.5 * dt * k2), float)
        k4 = np.asarray(rhs(y + dt * k3), float)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > kernels.BLOWUP_CAP:
            end = k
            break
        traj[k + 1] = y
    return traj[: end + 1], end


def verify_hyperelliptic_relation(N: int, traj: TrajectoryRecord) -> float:
    """Max residual of (dx_1/dt)^2 = prod_{j=2..N}(x_1^2 + E_j1) along a
    generalized-Euler trajectory, with E_j1 = x_j^2 - x_1^2 frozen at the
    initial state.  Residuals are normalized by 1 + |product|."""
    if traj.dim != N:
        raise DimensionError("trajectory dimension does not match N")
    x0 = traj.states[0]
    E = x0[1:] ** 2 - x0[0] ** 2
    worst = 0.0
    for x in traj.states:
        xdot1 = float(kernels._rhs_product_complement(x)[0])
        prod = float(np.prod(x[0] ** 2 + E))
        worst = max(worst, abs(xdot1 * xdot1 - prod) / (1.0 + abs(prod)))
    return worst
