"""Geodesic flow of the deformed bundle metric in a parallel frame.

The bundle geodesic is carried by three fields along the parameter sigma: the
horizontal velocity u of the projected base curve, the fiber coordinate xi,
and its derivative w. Writing everything in a frame that is parallel along
the base projection removes the base position from the system entirely and
leaves the first-order ODE

    u' = -T(xi, w) u,      xi' = w,      w' = F(xi, w),

where T is the twisted curvature operator of `space_form.twisted_apply` and F
depends on the bundle. On the full tangent bundle

    F = -2 delta^2 <w, J xi> (J w - gamma <w, xi> J xi),
    gamma = delta^2 / (1 + delta^2 |xi|^2),

while on the unit bundle the constraint force changes it to

    F = -|w|^2 xi - 2 delta^2 <w, J xi> (J w + <w, J xi> xi).

States pack as [u, xi, w] on the last axis; all routines broadcast over
leading batch axes. Integration is classical fixed-step fourth-order
Runge-Kutta.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .space_form import (
    Array,
    BergerParams,
    SpaceFormModel,
    apply_J,
    inner,
    twisted_apply,
    twisted_matrix,
)

BUNDLES = ("TM", "T1M")


class FlowError(Exception):
    """Base class for geodesic-flow failures."""


class InfeasibleSpeedError(FlowError):
    """The fiber data already exceeds the requested lifted speed."""


class MissingDirectionError(FlowError):
    """A base direction is required to complete the initial state."""


class IntegrationAbort(FlowError):
    """Constraint drift on the unit bundle exceeded the abort threshold."""


class VerticalGeodesicWarning(UserWarning):
    """The prepared state has no horizontal velocity."""


@dataclass(frozen=True)
class FlowConfig:
    """Integration controls.

    renormalize re-projects unit-bundle states onto the constraint set after
    every step; it is off by default so conservation checks see the raw
    integrator output. abort_tol bounds the tolerated unit-norm and tangency
    drift before the run is cut short.
    """

    bundle: str = "T1M"
    step: float = 1e-3
    sigma_max: float = 20.0
    sample_stride: int = 10
    renormalize: bool = False
    abort_tol: float = 1e-4

    def __post_init__(self) -> None:
        if self.bundle not in BUNDLES:
            raise ValueError(f"bundle must be one of {BUNDLES}, got {self.bundle!r}")
        if not (self.step > 0.0 and np.isfinite(self.step)):
            raise ValueError("step must be positive and finite")
        if not (self.sigma_max > 0.0 and np.isfinite(self.sigma_max)):
            raise ValueError("sigma_max must be positive and finite")
        if self.step > self.sigma_max:
            raise ValueError("step must not exceed sigma_max")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ValueError("sample_stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        n = int(round(self.sigma_max / self.step))
        if n < 1:
            raise ValueError("sigma_max must cover at least one step")
        return n


@dataclass(frozen=True)
class BundleState:
    """Point of the reduced phase space, batched over leading axes.

    u carries the base velocity, xi the fiber coordinate, w the fiber
    velocity; sigma records the parameter value the state is attached to.
    """

    u: Array
    xi: Array
    w: Array
    sigma: float = 0.0

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=float)
        xi = np.asarray(self.xi, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if not (u.shape == xi.shape == w.shape):
            raise ValueError("u, xi, w must share one shape")
        if u.shape[-1] % 2 != 0:
            raise ValueError("component dimension must be even")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "w", w)

    @property
    def dim(self) -> int:
        return self.u.shape[-1]

    def pack(self) -> Array:
        return np.concatenate([self.u, self.xi, self.w], axis=-1)

    @classmethod
    def unpack(cls, y: Array) -> "BundleState":
        y = np.asarray(y, dtype=float)
        dim = y.shape[-1] // 3
        if 3 * dim != y.shape[-1]:
            raise ValueError("packed state length must be a multiple of three")
        return cls(y[..., :dim], y[..., dim : 2 * dim], y[..., 2 * dim :])


def lifted_speed(params: BergerParams, u: Array, xi: Array, w: Array) -> Array:
    """Norm of the bundle velocity (u horizontal, w vertical) at fiber point xi."""
    mu = inner(w, apply_J(xi))
    return np.sqrt(inner(u, u) + inner(w, w) + params.delta**2 * mu**2)


def make_rhs(model: SpaceFormModel, params: BergerParams, bundle: str):
    """Right-hand side of the reduced geodesic system as a packed-state map."""
    if bundle not in BUNDLES:
        raise ValueError(f"bundle must be one of {BUNDLES}, got {bundle!r}")
    d2 = params.delta**2

    def rhs(y: Array) -> Array:
        dim = y.shape[-1] // 3
        u = y[..., :dim]
        xi = y[..., dim : 2 * dim]
        w = y[..., 2 * dim :]
        jxi = apply_J(xi)
        mu = inner(w, jxi)
        du = -twisted_apply(model, params, xi, w, u)
        if bundle == "TM":
            gamma = d2 / (1.0 + d2 * inner(xi, xi))
            dw = -2.0 * d2 * mu[..., None] * (
                apply_J(w) - (gamma * inner(w, xi))[..., None] * jxi
            )
        else:
            dw = -inner(w, w)[..., None] * xi - 2.0 * d2 * mu[..., None] * (
                apply_J(w) + mu[..., None] * xi
            )
        return np.concatenate([du, w, dw], axis=-1)

    return rhs


def rhs_tm(
    state: BundleState, model: SpaceFormModel, params: BergerParams
) -> BundleState:
    """Derivative (du, dxi, dw) of the full-bundle system at the state."""
    d = BundleState.unpack(make_rhs(model, params, "TM")(state.pack()))
    return BundleState(d.u, d.xi, d.w, state.sigma)


def rhs_t1m(
    state: BundleState,
    model: SpaceFormModel,
    params: BergerParams,
    constraint_tol: float = 1e-6,
) -> BundleState:
    """Derivative of the unit-bundle system; rejects off-constraint states.

    The unit-bundle equations presuppose |xi| = 1 and <w, xi> = 0; feeding
    them other data produces meaningless derivatives, so violations beyond
    constraint_tol raise instead.
    """
    norm_err = float(np.max(np.abs(np.linalg.norm(state.xi, axis=-1) - 1.0)))
    tan_err = float(np.max(np.abs(inner(state.w, state.xi))))
    if max(norm_err, tan_err) > constraint_tol:
        raise ValueError(
            f"state violates unit-bundle constraints: fiber norm error "
            f"{norm_err:.3e}, tangency error {tan_err:.3e} exceed "
            f"{constraint_tol:.1e}"
        )
    d = BundleState.unpack(make_rhs(model, params, "T1M")(state.pack()))
    return BundleState(d.u, d.xi, d.w, state.sigma)


def rk4_step(rhs, y: Array, h: float) -> Array:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _project_unit(y: Array) -> Array:
    dim = y.shape[-1] // 3
    xi = y[..., dim : 2 * dim]
    w = y[..., 2 * dim :]
    xi = xi / np.linalg.norm(xi, axis=-1, keepdims=True)
    w = w - inner(w, xi)[..., None] * xi
    return np.concatenate([y[..., :dim], xi, w], axis=-1)


def _constraint_drift(y: Array) -> float:
    dim = y.shape[-1] // 3
    xi = y[..., dim : 2 * dim]
    w = y[..., 2 * dim :]
    norm_err = np.abs(np.linalg.norm(xi, axis=-1) - 1.0)
    tan_err = np.abs(inner(w, xi))
    return float(max(np.max(norm_err), np.max(tan_err)))


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution with per-sample invariants.

    Sample arrays carry the record axis first. c is the fiber speed |w|, mu
    the twist momentum <w, J xi>, lam the total vertical speed
    sqrt(c^2 + delta^2 mu^2).
    """

    bundle: str
    delta: float
    sigma: Array
    u: Array
    xi: Array
    w: Array
    c: Array
    mu: Array
    lam: Array
    xi_norm: Array
    lifted_speed: Array

    @property
    def n_samples(self) -> int:
        return self.sigma.shape[0]

    def state_at(self, index: int) -> BundleState:
        return BundleState(
            self.u[index],
            self.xi[index],
            self.w[index],
            float(self.sigma[index]),
        )


def _diagnose(
    params: BergerParams, bundle: str, sigma: Array, ys: Array
) -> Trajectory:
    dim = ys.shape[-1] // 3
    u = ys[..., :dim]
    xi = ys[..., dim : 2 * dim]
    w = ys[..., 2 * dim :]
    mu = inner(w, apply_J(xi))
    c = np.linalg.norm(w, axis=-1)
    lam = np.sqrt(c**2 + params.delta**2 * mu**2)
    return Trajectory(
        bundle=bundle,
        delta=params.delta,
        sigma=sigma,
        u=u,
        xi=xi,
        w=w,
        c=c,
        mu=mu,
        lam=lam,
        xi_norm=np.linalg.norm(xi, axis=-1),
        lifted_speed=np.sqrt(inner(u, u) + lam**2),
    )


def integrate(
    state: BundleState,
    model: SpaceFormModel,
    params: BergerParams,
    config: FlowConfig,
) -> Trajectory:
    """Run the flow and record every sample_stride-th step plus the endpoint.

    Unit-bundle runs abort with IntegrationAbort once the recorded state
    violates |xi| = 1 or <w, xi> = 0 by more than config.abort_tol.
    """
    if state.dim != model.dim:
        raise ValueError(
            f"state dimension {state.dim} does not match model dimension {model.dim}"
        )
    rhs = make_rhs(model, params, config.bundle)
    n_steps = config.n_steps
    stride = int(config.sample_stride)
    y = state.pack()
    records = [y]
    steps = [0]
    for k in range(1, n_steps + 1):
        y = rk4_step(rhs, y, config.step)
        if config.bundle == "T1M" and config.renormalize:
            y = _project_unit(y)
        if k % stride == 0 or k == n_steps:
            if config.bundle == "T1M":
                drift = _constraint_drift(y)
                if drift > config.abort_tol:
                    raise IntegrationAbort(
                        f"unit-bundle constraint drift {drift:.3e} exceeded "
                        f"{config.abort_tol:.3e} at sigma = {k * config.step:.6g}"
                    )
            records.append(y)
            steps.append(k)
    sigma = np.asarray(steps, dtype=float) * config.step
    return _diagnose(params, config.bundle, sigma, np.stack(records))


def prepare_initial(
    model: SpaceFormModel,
    params: BergerParams,
    bundle: str,
    xi0: Array,
    w0: Array,
    u_dir: Array | None = None,
    speed: float = 1.0,
    vertical_tol: float = 1e-12,
) -> BundleState:
    """Complete fiber data into a unit-speed (or given-speed) initial state.

    On the unit bundle xi0 is normalized and w0 projected tangent to the
    fiber sphere. The horizontal speed is then fixed by the speed budget
    |u|^2 = speed^2 - |w|^2 - delta^2 <w, J xi>^2; a negative budget raises
    InfeasibleSpeedError. When the budget is positive, u_dir supplies the
    base direction and is mandatory; when it vanishes the geodesic is purely
    vertical, u = 0, and a VerticalGeodesicWarning is emitted.
    """
    if bundle not in BUNDLES:
        raise ValueError(f"bundle must be one of {BUNDLES}, got {bundle!r}")
    xi0 = np.asarray(xi0, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    if xi0.shape != (model.dim,) or w0.shape != (model.dim,):
        raise ValueError(f"xi0 and w0 must have shape ({model.dim},)")
    if not (np.all(np.isfinite(xi0)) and np.all(np.isfinite(w0))):
        raise ValueError("initial fiber data must be finite")
    if not (speed > 0.0 and np.isfinite(speed)):
        raise ValueError("speed must be positive and finite")
    if bundle == "T1M":
        norm = np.linalg.norm(xi0)
        if norm == 0.0:
            raise ValueError("unit-bundle fiber coordinate must be nonzero")
        xi0 = xi0 / norm
        w0 = w0 - inner(w0, xi0) * xi0
    mu = inner(w0, apply_J(xi0))
    lam2 = inner(w0, w0) + params.delta**2 * mu**2
    budget = speed**2 - lam2
    if budget < -vertical_tol * speed**2:
        raise InfeasibleSpeedError(
            f"fiber data carries lambda^2 = {lam2:.6g}, exceeding the "
            f"requested squared lifted speed {speed**2:.6g}"
        )
    if budget <= vertical_tol * speed**2:
        warnings.warn(
            "speed budget is exhausted by the fiber motion; the geodesic "
            "stays vertical",
            VerticalGeodesicWarning,
            stacklevel=2,
        )
        u0 = np.zeros(model.dim)
    else:
        if u_dir is None:
            raise MissingDirectionError(
                "a base direction is required when the horizontal speed is nonzero"
            )
        u_dir = np.asarray(u_dir, dtype=float)
        if u_dir.shape != (model.dim,):
            raise ValueError(f"u_dir must have shape ({model.dim},)")
        nd = np.linalg.norm(u_dir)
        if not (nd > 0.0 and np.isfinite(nd)):
            raise MissingDirectionError("base direction must be nonzero and finite")
        u0 = np.sqrt(budget) * u_dir / nd
    return BundleState(u0, xi0, w0)


def random_initial_states(
    model: SpaceFormModel,
    params: BergerParams,
    bundle: str,
    count: int,
    rng: np.random.Generator,
    lam2_range: tuple[float, float] = (0.05, 0.8),
    fiber_norm_range: tuple[float, float] = (0.4, 1.3),
) -> BundleState:
    """Batch of unit-lifted-speed states with generic fiber data.

    Vertical energy fractions lam^2 are drawn uniformly from lam2_range so the
    batch mixes slow and fast fiber motion. Full-bundle states also vary the
    fiber norm over fiber_norm_range.
    """
    if bundle not in BUNDLES:
        raise ValueError(f"bundle must be one of {BUNDLES}, got {bundle!r}")
    if count < 1:
        raise ValueError("count must be positive")
    dim = model.dim
    xi = rng.normal(size=(count, dim))
    xi /= np.linalg.norm(xi, axis=-1, keepdims=True)
    if bundle == "TM":
        xi *= rng.uniform(*fiber_norm_range, size=(count, 1))
    w = rng.normal(size=(count, dim))
    if bundle == "T1M":
        w -= inner(w, xi)[..., None] * xi
    lam2 = rng.uniform(*lam2_range, size=count)
    cur = inner(w, w) + params.delta**2 * inner(w, apply_J(xi)) ** 2
    w *= np.sqrt(lam2 / cur)[..., None]
    u = rng.normal(size=(count, dim))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    u *= np.sqrt(1.0 - lam2)[..., None]
    return BundleState(u, xi, w)


def conserved_report(traj: Trajectory) -> dict[str, float]:
    """Worst drift of each tracked invariant relative to its first sample.

    tangency and horizontal_speed are recomputed from the raw samples; on the
    full bundle only lifted_speed and vertical_energy are expected to hold,
    while the unit bundle additionally preserves fiber_norm, tangency,
    fiber_speed, and twist_momentum.
    """

    def drift(series: Array) -> float:
        return float(np.max(np.abs(series - series[0])))

    tangency = inner(traj.w, traj.xi)
    return {
        "lifted_speed": drift(traj.lifted_speed),
        "vertical_energy": drift(traj.lam),
        "fiber_norm": drift(traj.xi_norm),
        "fiber_speed": drift(traj.c),
        "twist_momentum": drift(traj.mu),
        "tangency": float(np.max(np.abs(tangency - tangency[0]))),
        "horizontal_speed": drift(np.linalg.norm(traj.u, axis=-1)),
    }


def _uniform_prefix(sigma: Array) -> int:
    """Length of the leading uniformly spaced block of sigma."""
    if sigma.shape[0] < 2:
        return sigma.shape[0]
    h = sigma[1] - sigma[0]
    gaps = np.diff(sigma)
    bad = np.nonzero(np.abs(gaps - h) > 1e-9 * max(h, 1.0))[0]
    return sigma.shape[0] if bad.size == 0 else int(bad[0]) + 1


def twisted_rate_check(
    model: SpaceFormModel, params: BergerParams, traj: Trajectory
) -> dict[str, float]:
    """Measure how fast the twisted operator changes along the flow.

    Differentiates the operator matrix T(xi(sigma), w(sigma)) by a fourth
    order central stencil over the uniformly sampled part of the trajectory
    and reports the largest Frobenius norm of the derivative, normalized by
    the largest Frobenius norm of the operator itself. Also evaluates, under
    the same normalization, the candidate closed-form rate

        2 delta^6 <w, J xi> <w, xi> (1 - |xi|^2) / (1 + delta^2 |xi|^2)
            * R(xi, J xi)

    so callers can compare the two. Requires at least five uniform samples.
    """
    keep = _uniform_prefix(traj.sigma)
    if keep < 5:
        raise ValueError("need at least five uniformly spaced samples")
    sigma = traj.sigma[:keep]
    xi = traj.xi[:keep]
    w = traj.w[:keep]
    h = float(sigma[1] - sigma[0])
    mats = twisted_matrix(model, params, xi, w)
    rate = (
        mats[:-4] - 8.0 * mats[1:-3] + 8.0 * mats[3:-1] - mats[4:]
    ) / (12.0 * h)
    scale = float(np.max(np.linalg.norm(mats, axis=(-2, -1))))
    scale = max(scale, 1.0)
    d2 = params.delta**2
    mu = inner(w, apply_J(xi))
    factor = (
        2.0
        * d2**3
        * mu
        * inner(w, xi)
        * (1.0 - inner(xi, xi))
        / (1.0 + d2 * inner(xi, xi))
    )
    base_rot = twisted_matrix(model, BergerParams(0.0), xi, apply_J(xi))
    closed = factor[..., None, None] * base_rot
    closed_interior = closed[2:-2]
    closed_max = float(np.max(np.linalg.norm(closed, axis=(-2, -1))))
    mismatch = float(
        np.max(np.linalg.norm(rate - closed_interior, axis=(-2, -1)))
    )
    return {
        "fd_rate": float(np.max(np.linalg.norm(rate, axis=(-2, -1)))) / scale,
        "closed_form_rate": closed_max / scale,
        "mismatch": mismatch / scale,
        "mismatch_rel": mismatch / closed_max if closed_max > 0.0 else 0.0,
        "operator_scale": scale,
        "step": h,
    }
