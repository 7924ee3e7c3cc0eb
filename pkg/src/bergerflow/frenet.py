"""Derivative chains and generalized curvatures of projected base curves.

The projected curve of a unit-bundle geodesic has velocity u(sigma) governed
by u' = -T u with T the twisted curvature operator, and T stays constant
along the flow. Every higher derivative is then a power, u^(p) = (-T)^p u,
so the Frenet apparatus of the projection collapses to linear algebra on the
chain x^(1), x^(2), ... = u, u', ... Gram determinants of the chain give the
generalized curvatures

    k_i = sqrt(D_{i-1} D_{i+1}) / (D_i v),    D_i = det Gram(x^(1)..x^(i)),

computed stably from the R factor of a QR decomposition: with L_j the
diagonal magnitudes, D_i = (L_0 ... L_{i-1})^2 and k_i = L_i / (L_{i-1} v).

Chains can also be estimated from integrated samples by central finite
differences, which ties the algebraic route to the actual flow and is the
only route offered for full-bundle trajectories, where the power recursion
has no constancy guarantee to stand on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .space_form import (
    Array,
    BergerParams,
    SpaceFormModel,
    inner,
    j_matrix,
    twisted_matrix,
)

DEFAULT_RANK_TOL = 1e-10
ADMISSIBILITY_TOL = 1e-8


class DegenerateProjectionError(ValueError):
    """The projected curve is a point; curvatures are undefined."""


def fd_stencil(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Central finite-difference stencil for the given derivative order.

    Returns integer offsets -p..p with p = ceil(order / 2) and the matching
    coefficients; the estimate is sum(c_i f(x + o_i h)) / h^order, accurate
    to O(h^2) at every order.
    """
    if order < 1:
        raise ValueError("derivative order must be positive")
    p = (order + 1) // 2
    offsets = np.arange(-p, p + 1, dtype=float)
    system = np.vander(offsets, increasing=True).T
    target = np.zeros(2 * p + 1)
    target[order] = math.factorial(order)
    coeffs = np.linalg.solve(system, target)
    return offsets.astype(int), coeffs


def algebraic_chain(
    model: SpaceFormModel,
    params: BergerParams,
    u: Array,
    xi: Array,
    w: Array,
    order: int,
    admissibility_tol: float = ADMISSIBILITY_TOL,
) -> Array:
    """Stack x^(1)..x^(order) from the power recursion x^(p+1) = -T x^(p).

    The recursion is justified only where the twisted operator is constant
    along the flow, which is guaranteed on the unit bundle; states violating
    |xi| = 1 or <w, xi> = 0 beyond admissibility_tol are rejected so that
    full-bundle data cannot silently borrow the unit-bundle shortcut. Use
    numeric_chain for such trajectories instead.
    """
    if order < 2:
        raise ValueError("chain order must be at least 2")
    u = np.asarray(u, dtype=float)
    xi = np.asarray(xi, dtype=float)
    w = np.asarray(w, dtype=float)
    norm_err = float(np.max(np.abs(np.linalg.norm(xi, axis=-1) - 1.0)))
    tan_err = float(np.max(np.abs(inner(w, xi))))
    if max(norm_err, tan_err) > admissibility_tol:
        raise ValueError(
            "power recursion requires unit-bundle states: fiber norm error "
            f"{norm_err:.3e}, tangency error {tan_err:.3e} exceed "
            f"{admissibility_tol:.1e}; use numeric_chain for such data"
        )
    mat = twisted_matrix(model, params, xi, w)
    vecs = [u]
    for _ in range(order - 1):
        vecs.append(-(mat @ vecs[-1][..., None])[..., 0])
    return np.stack(vecs, axis=-2)


def numeric_chain(samples: Array, step: float, center: int, order: int) -> Array:
    """Estimate the chain at one recorded index by central differences.

    samples holds u at uniform spacing `step` with the record axis first.
    center must leave ceil((order - 1) / 2) samples of margin on both sides.
    """
    samples = np.asarray(samples, dtype=float)
    if order < 2:
        raise ValueError("chain order must be at least 2")
    if not (step > 0.0 and np.isfinite(step)):
        raise ValueError("step must be positive and finite")
    margin = order // 2
    if center - margin < 0 or center + margin >= samples.shape[0]:
        raise ValueError(
            f"center index {center} leaves less than {margin} samples of margin"
        )
    rows = [samples[center]]
    for d in range(1, order):
        offsets, coeffs = fd_stencil(d)
        est = sum(
            c * samples[center + int(o)] for o, c in zip(offsets, coeffs)
        ) / step**d
        rows.append(est)
    return np.stack(rows, axis=-2)


@dataclass(frozen=True)
class CurvatureProfile:
    """Gram data of one or many chains, batched over leading axes.

    diagonals holds the QR diagonal magnitudes L_0..L_{order-1}; ratios the
    normalized Gram ratios (L_i / v)^2 whose first drop below rank_tol marks
    the effective rank; curvatures the k_1..k_{order-1} with entries at and
    beyond the effective rank set to zero. Trajectory-level profiles carry
    the sample parameters in sigmas and the chain construction in chain_kind.
    """

    curvatures: Array
    ratios: Array
    diagonals: Array
    speed: Array
    effective_rank: Array
    rank_tol: float
    sigmas: Array | None = None
    chain_kind: str = "algebraic"

    @property
    def order(self) -> int:
        return self.diagonals.shape[-1]

    @property
    def gram_determinants(self) -> Array:
        """D_1..D_order, the Gram determinants of growing chain prefixes."""
        return np.cumprod(self.diagonals**2, axis=-1)

    def raw_curvature(self, index: int) -> Array:
        """k_index from the raw diagonals, ignoring the rank truncation."""
        if not 1 <= index <= self.order - 1:
            raise ValueError(f"index must be in [1, {self.order - 1}]")
        num = self.diagonals[..., index]
        den = self.diagonals[..., index - 1] * self.speed
        return _safe_divide(num, den)


def _safe_divide(num: Array, den: Array) -> Array:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den != 0.0)
    return out


def gram_profile(chain: Array, rank_tol: float = DEFAULT_RANK_TOL) -> CurvatureProfile:
    """Curvatures and rank data of chains shaped (..., order, dim)."""
    chain = np.asarray(chain, dtype=float)
    if chain.ndim < 2:
        raise ValueError("chain must have shape (..., order, dim)")
    order = chain.shape[-2]
    r_factor = np.linalg.qr(np.swapaxes(chain, -1, -2), mode="r")
    diag = np.abs(np.diagonal(r_factor, axis1=-2, axis2=-1))
    if diag.shape[-1] < order:
        pad = np.zeros(diag.shape[:-1] + (order - diag.shape[-1],))
        diag = np.concatenate([diag, pad], axis=-1)
    speed = np.linalg.norm(chain[..., 0, :], axis=-1)
    ratios = _safe_divide(diag, speed[..., None]) ** 2
    below = ratios < rank_tol
    rank = np.where(np.any(below, axis=-1), np.argmax(below, axis=-1), order)
    raw = _safe_divide(diag[..., 1:], diag[..., :-1] * speed[..., None])
    keep = np.arange(1, order) < rank[..., None]
    return CurvatureProfile(
        curvatures=np.where(keep, raw, 0.0),
        ratios=ratios,
        diagonals=diag,
        speed=speed,
        effective_rank=rank,
        rank_tol=rank_tol,
    )


def generalized_curvatures(chain: Array, rank_tol: float = DEFAULT_RANK_TOL) -> Array:
    """Curvatures k_1, k_2, ... of a single chain, cut at the effective rank.

    A chain whose second row already degenerates describes a geodesic and
    yields an empty sequence; a vanishing first row has no curve behind it
    and raises DegenerateProjectionError.
    """
    chain = np.asarray(chain, dtype=float)
    if chain.ndim != 2:
        raise ValueError("expected a single chain of shape (order, dim)")
    if np.linalg.norm(chain[0]) == 0.0:
        raise DegenerateProjectionError(
            "first derivative vanishes; the projected curve is a point"
        )
    profile = gram_profile(chain, rank_tol)
    rank = int(profile.effective_rank)
    return profile.curvatures[: max(rank - 1, 0)]


def curvature_profile(
    traj,
    model: SpaceFormModel,
    params: BergerParams,
    order: int,
    rank_tol: float = DEFAULT_RANK_TOL,
    chain_kind: str = "algebraic",
    stride: int = 1,
) -> CurvatureProfile:
    """Per-sample curvature profile along a trajectory.

    chain_kind "algebraic" applies the power recursion at every stride-th
    sample and is restricted to unit-bundle trajectories; "numeric"
    differentiates the recorded u-samples directly and works on any
    trajectory, at the cost of trimming the margin the stencils need.
    Requires the trajectory's records to be uniformly spaced.
    """
    if stride < 1:
        raise ValueError("stride must be positive")
    if chain_kind not in ("algebraic", "numeric"):
        raise ValueError(f"chain_kind must be algebraic or numeric, got {chain_kind!r}")
    sigma = traj.sigma
    if sigma.shape[0] >= 3:
        gaps = np.diff(sigma)
        if np.max(np.abs(gaps - gaps[0])) > 1e-9 * max(float(gaps[0]), 1.0):
            raise ValueError("trajectory samples must be uniformly spaced")
    if float(np.min(np.linalg.norm(traj.u, axis=-1))) == 0.0:
        raise DegenerateProjectionError(
            "trajectory has vanishing horizontal velocity; the projection "
            "is a point and has no curvatures"
        )
    if chain_kind == "algebraic":
        idx = np.arange(0, sigma.shape[0], stride)
        if traj.bundle != "T1M":
            raise ValueError(
                "algebraic chains require a unit-bundle trajectory; "
                "use chain_kind='numeric' for full-bundle data"
            )
        chains = algebraic_chain(
            model, params, traj.u[idx], traj.xi[idx], traj.w[idx], order
        )
    else:
        margin = order // 2
        idx = np.arange(margin, sigma.shape[0] - margin, stride)
        if idx.size == 0:
            raise ValueError("not enough samples for the stencil margin")
        h = float(sigma[1] - sigma[0])
        chains = np.stack(
            [numeric_chain(traj.u, h, int(i), order) for i in idx]
        )
    profile = gram_profile(chains, rank_tol)
    return CurvatureProfile(
        curvatures=profile.curvatures,
        ratios=profile.ratios,
        diagonals=profile.diagonals,
        speed=profile.speed,
        effective_rank=profile.effective_rank,
        rank_tol=rank_tol,
        sigmas=sigma[idx],
        chain_kind=chain_kind,
    )


def constancy_summary(profile: CurvatureProfile, n_curvatures: int = 5) -> dict:
    """Relative variation of the leading curvatures across the record axis.

    The record axis comes first; any remaining axes index configurations.
    For each configuration the variation of k_j over records is
    (max - min) / mean, and the summary keeps the worst over configurations
    and over j up to n_curvatures, clipped below every effective rank.
    """
    ks = profile.curvatures
    min_rank = int(np.min(profile.effective_rank))
    usable = min(n_curvatures, min_rank - 1)
    per_curvature = []
    worst = 0.0
    for j in range(usable):
        k = ks[..., j]
        spread = k.max(axis=0) - k.min(axis=0)
        mean = k.mean(axis=0)
        var = float(np.max(_safe_divide(spread, mean)))
        per_curvature.append(var)
        worst = max(worst, var)
    return {
        "worst_relative_variation": worst,
        "per_curvature": per_curvature,
        "curvatures_checked": usable,
        "min_effective_rank": min_rank,
    }


def vanishing_summary(profile: CurvatureProfile) -> dict:
    """Size of the curvature past the generic rank and of the trailing Gram ratio.

    The generic rank is the largest effective rank in the batch; the raw
    curvature at that index (no truncation, normalized by max(k_1, 1)) must
    be numerically zero for every configuration. Probing at the shared
    generic index rather than each configuration's own rank keeps states
    near a degenerate stratum, whose small-but-genuine trailing directions
    can dip below rank_tol, from being misread as vanishing-curvature
    failures. The last Gram ratio (L_{order-1} / v)^2 bounds every later
    curvature.
    """
    rank = profile.effective_rank
    order = profile.order
    idx = int(min(np.max(rank), order - 1))
    k_past_rank = profile.raw_curvature(max(idx, 1))
    scale = np.maximum(profile.curvatures[..., 0], 1.0)
    return {
        "worst_first_zero_curvature": float(np.max(k_past_rank / scale)),
        "worst_tail_ratio": float(np.max(profile.ratios[..., -1])),
        "first_zero_index_min": int(np.min(rank)),
        "first_zero_index_max": int(np.max(rank)),
    }


def span_residuals(
    model: SpaceFormModel,
    params: BergerParams,
    xi: Array,
    w: Array,
    qmax: int = 5,
) -> Array:
    """Relative residuals of expressing powers of T in fixed three-element spans.

    Even powers T^(2q) are fitted in span{T^2, J T, I}; odd powers T^(2q+1)
    in span{J T^2, T, J}. Returns shape (qmax, 2) with the even-power
    residual in column 0 and the odd-power residual in column 1, for
    q = 1..qmax. Residuals are Frobenius-relative to the target power; a
    vanishing power (flat model) fits exactly and reports zero.
    """
    if qmax < 1:
        raise ValueError("qmax must be positive")
    xi = np.asarray(xi, dtype=float)
    w = np.asarray(w, dtype=float)
    if xi.ndim != 1:
        raise ValueError("span residuals are defined for a single state")
    dim = xi.shape[-1]
    mat = twisted_matrix(model, params, xi, w)
    jm = j_matrix(dim)
    eye = np.eye(dim)
    even_basis = np.stack([(mat @ mat).ravel(), (jm @ mat).ravel(), eye.ravel()], axis=1)
    odd_basis = np.stack(
        [(jm @ mat @ mat).ravel(), mat.ravel(), jm.ravel()], axis=1
    )
    out = np.zeros((qmax, 2))
    for q in range(1, qmax + 1):
        for col, (basis, power) in enumerate(
            [(even_basis, 2 * q), (odd_basis, 2 * q + 1)]
        ):
            target = np.linalg.matrix_power(mat, power).ravel()
            norm = float(np.linalg.norm(target))
            if norm == 0.0:
                out[q - 1, col] = 0.0
                continue
            coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
            out[q - 1, col] = float(np.linalg.norm(target - basis @ coef)) / norm
    return out
