"""Deformed metric, brackets, and Levi-Civita connection on the tangent bundle.

Points of the bundle are handled through their fiber coordinate xi only; base
positions never enter because every quantity below is tensorial in them. A
tangent vector of the bundle splits into a horizontal and a vertical part,
both expressed in the adapted frame of the base. The metric keeps horizontal
and vertical parts orthogonal, leaves the horizontal part undeformed, and
stretches vertical vectors along J xi:

    <<A, B>> = <A_h, B_h> + <A_v, B_v> + delta^2 <A_v, J xi> <B_v, J xi>.

Vector fields are replaced by pointwise jets (values of three fields and of
their pairwise covariant derivatives), which is exactly the data the Koszul
formula consumes. The connection formulas implemented in `lifted_connection`
are verified against that formula by `koszul_residual`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .space_form import Array, BergerParams, SpaceFormModel, apply_J, inner, riemann

FIELD_NAMES = ("x", "y", "z")
DERIV_PAIRS = tuple((a, b) for a in FIELD_NAMES for b in FIELD_NAMES if a != b)
METRIC_RULES = ("hh_by_h", "vv_by_h", "hh_by_v", "vv_by_v")
KIND_TRIPLES = tuple((a, b, c) for a in "hv" for b in "hv" for c in "hv")


@dataclass(frozen=True)
class FiberPoint:
    """Fiber coordinate xi of a bundle point, any magnitude."""

    xi: Array

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))


@dataclass(frozen=True)
class LiftedVector:
    """Tangent vector of the bundle with horizontal and vertical components."""

    h: Array
    v: Array

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))

    def __add__(self, other: "LiftedVector") -> "LiftedVector":
        return LiftedVector(self.h + other.h, self.v + other.v)

    def __sub__(self, other: "LiftedVector") -> "LiftedVector":
        return LiftedVector(self.h - other.h, self.v - other.v)


def horizontal_lift(vec: Array) -> LiftedVector:
    vec = np.asarray(vec, dtype=float)
    return LiftedVector(vec, np.zeros_like(vec))


def vertical_lift(vec: Array) -> LiftedVector:
    vec = np.asarray(vec, dtype=float)
    return LiftedVector(np.zeros_like(vec), vec)


def lift(kind: str, vec: Array) -> LiftedVector:
    if kind == "h":
        return horizontal_lift(vec)
    if kind == "v":
        return vertical_lift(vec)
    raise ValueError(f"lift kind must be 'h' or 'v', got {kind!r}")


@dataclass(frozen=True)
class FieldJet:
    """First-order germ of three base vector fields at one point.

    `values` holds the field values keyed by "x", "y", "z"; `derivs` holds the
    covariant derivative nabla_a b for each ordered pair of distinct fields.
    That is exactly the data consumed by the bracket and Koszul computations,
    so arbitrary arrays here model arbitrary field configurations.
    """

    values: dict[str, Array]
    derivs: dict[tuple[str, str], Array] = field(default_factory=dict)

    def __post_init__(self) -> None:
        vals = {k: np.asarray(v, dtype=float) for k, v in self.values.items()}
        ders = {k: np.asarray(v, dtype=float) for k, v in self.derivs.items()}
        if set(vals) != set(FIELD_NAMES):
            raise ValueError(f"jet values must be keyed by {FIELD_NAMES}")
        for pair in DERIV_PAIRS:
            ders.setdefault(pair, np.zeros_like(vals[pair[1]]))
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "derivs", ders)

    def value(self, name: str) -> Array:
        return self.values[name]

    def deriv(self, direction: str, target: str) -> Array:
        return self.derivs[(direction, target)]

    def rotated(self, order: tuple[str, str, str]) -> "FieldJet":
        """Jet with the roles of x, y, z taken by the named fields, in order."""
        mapping = dict(zip(FIELD_NAMES, order))
        vals = {new: self.values[old] for new, old in mapping.items()}
        ders = {
            (a, b): self.derivs[(mapping[a], mapping[b])] for a, b in DERIV_PAIRS
        }
        return FieldJet(vals, ders)


def random_jet(rng: np.random.Generator, dim: int, batch: tuple[int, ...] = ()) -> FieldJet:
    """Gaussian jet, batched over leading axes."""
    vals = {nm: rng.normal(size=batch + (dim,)) for nm in FIELD_NAMES}
    ders = {pair: rng.normal(size=batch + (dim,)) for pair in DERIV_PAIRS}
    return FieldJet(vals, ders)


def lifted_inner(
    params: BergerParams, at: FiberPoint, a: LiftedVector, b: LiftedVector
) -> Array:
    """Deformed bundle metric at the fiber point `at`."""
    jxi = apply_J(at.xi)
    return (
        inner(a.h, b.h)
        + inner(a.v, b.v)
        + params.delta**2 * inner(a.v, jxi) * inner(b.v, jxi)
    )


def _bracket(
    model: SpaceFormModel,
    at: FiberPoint,
    jet: FieldJet,
    kind_a: str,
    a: str,
    kind_b: str,
    b: str,
) -> LiftedVector:
    """Lie bracket of the two lifted fields, as a lifted vector at `at`."""
    zero = np.zeros_like(jet.value(a))
    if kind_a == "h" and kind_b == "h":
        h = jet.deriv(a, b) - jet.deriv(b, a)
        v = -riemann(model, jet.value(a), jet.value(b), at.xi)
        return LiftedVector(h, v)
    if kind_a == "h" and kind_b == "v":
        return LiftedVector(zero, jet.deriv(a, b))
    if kind_a == "v" and kind_b == "h":
        return LiftedVector(zero, -jet.deriv(b, a))
    return LiftedVector(zero, zero)


def lift_bracket(
    kind_a: str, kind_b: str, jet: FieldJet, at: FiberPoint, model: SpaceFormModel
) -> LiftedVector:
    """Bracket of the lifts of the jet's x and y fields.

    Horizontal-horizontal brackets pick up the vertical curvature term
    -(R(x, y) xi)^v; mixed brackets reduce to vertical lifts of covariant
    derivatives; vertical-vertical brackets vanish.
    """
    return _bracket(model, at, jet, kind_a, "x", kind_b, "y")


def _connection(
    model: SpaceFormModel,
    params: BergerParams,
    at: FiberPoint,
    jet: FieldJet,
    kind_a: str,
    a: str,
    kind_b: str,
    b: str,
) -> LiftedVector:
    xi = at.xi
    jxi = apply_J(xi)
    X, Y = jet.value(a), jet.value(b)
    zero = np.zeros_like(X)
    d2 = params.delta**2
    if kind_a == "h" and kind_b == "h":
        return LiftedVector(jet.deriv(a, b), -0.5 * riemann(model, X, Y, xi))
    if kind_a == "h" and kind_b == "v":
        h = 0.5 * (
            riemann(model, xi, Y, X)
            + d2 * inner(Y, jxi)[..., None] * riemann(model, xi, jxi, X)
        )
        return LiftedVector(h, jet.deriv(a, b))
    if kind_a == "v" and kind_b == "h":
        h = 0.5 * (
            riemann(model, xi, X, Y)
            + d2 * inner(X, jxi)[..., None] * riemann(model, xi, jxi, Y)
        )
        return LiftedVector(h, zero)
    gamma = d2 / (1.0 + d2 * inner(xi, xi))
    v = d2 * (
        inner(X, jxi)[..., None] * apply_J(Y)
        + inner(Y, jxi)[..., None] * apply_J(X)
        - (gamma * (inner(Y, xi) * inner(X, jxi) + inner(X, xi) * inner(Y, jxi)))[..., None]
        * jxi
    )
    return LiftedVector(zero, v)


def lifted_connection(
    kind_a: str,
    kind_b: str,
    jet: FieldJet,
    at: FiberPoint,
    model: SpaceFormModel,
    params: BergerParams,
) -> LiftedVector:
    """Levi-Civita connection of the deformed metric, applied to lifted fields.

    Returns the covariant derivative of the lift of the jet's y field along
    the lift of its x field. The four kind combinations produce the familiar
    curvature corrections of the undeformed case plus delta-dependent terms;
    with delta = 0 the vertical-vertical derivative vanishes and the mixed
    ones lose their twist correction.
    """
    return _connection(model, params, at, jet, kind_a, "x", kind_b, "y")


def _metric_derivative(
    model: SpaceFormModel,
    params: BergerParams,
    at: FiberPoint,
    jet: FieldJet,
    kind_d: str,
    d: str,
    kind_b: str,
    b: str,
    kind_c: str,
    c: str,
) -> Array:
    """Directional derivative along lift(kind_d, d) of <<lift(kind_b, b), lift(kind_c, c)>>."""
    batch = jet.value(d).shape[:-1]
    if kind_b != kind_c:
        return np.zeros(batch)
    jxi = apply_J(at.xi)
    d2 = params.delta**2
    if kind_b == "h":
        if kind_d == "h":
            return inner(jet.deriv(d, b), jet.value(c)) + inner(
                jet.value(b), jet.deriv(d, c)
            )
        return np.zeros(batch)
    if kind_d == "h":
        return lifted_inner(
            params, at, vertical_lift(jet.deriv(d, b)), vertical_lift(jet.value(c))
        ) + lifted_inner(
            params, at, vertical_lift(jet.value(b)), vertical_lift(jet.deriv(d, c))
        )
    jXd = apply_J(jet.value(d))
    return d2 * (
        inner(jet.value(b), jXd) * inner(jet.value(c), jxi)
        + inner(jet.value(b), jxi) * inner(jet.value(c), jXd)
    )


def metric_derivative(
    rule: str,
    jet: FieldJet,
    at: FiberPoint,
    model: SpaceFormModel,
    params: BergerParams,
) -> Array:
    """Derivative of the metric pairing of lifted y and z along lifted x.

    `rule` selects the lift kinds: "hh_by_h" and "vv_by_h" differentiate
    horizontally, "hh_by_v" (identically zero) and "vv_by_v" vertically.
    Pairings of mixed kinds vanish identically, so no rule exists for them.
    """
    if rule not in METRIC_RULES:
        raise ValueError(f"rule must be one of {METRIC_RULES}, got {rule!r}")
    kb = "h" if rule.startswith("hh") else "v"
    kd = rule[-1]
    return _metric_derivative(model, params, at, jet, kd, "x", kb, "y", kb, "z")


def koszul_residual(
    jet: FieldJet, at: FiberPoint, model: SpaceFormModel, params: BergerParams
) -> Array:
    """Worst defect of the Koszul formula over all eight lift-kind choices.

    For lifts A, B, C of the jet's fields the formula reads

        2 <<nabla_A B, C>> = A<<B,C>> + B<<A,C>> - C<<A,B>>
                             + <<[A,B],C>> + <<[C,A],B>> - <<[B,C],A>>,

    and a Levi-Civita candidate must satisfy it exactly. Returns the max
    absolute residual, batched over jet leading axes.
    """
    worst = np.zeros(jet.value("x").shape[:-1])
    for ka, kb, kc in KIND_TRIPLES:
        A = lift(ka, jet.value("x"))
        B = lift(kb, jet.value("y"))
        C = lift(kc, jet.value("z"))
        lhs = 2.0 * lifted_inner(
            params, at, _connection(model, params, at, jet, ka, "x", kb, "y"), C
        )
        rhs = (
            _metric_derivative(model, params, at, jet, ka, "x", kb, "y", kc, "z")
            + _metric_derivative(model, params, at, jet, kb, "y", ka, "x", kc, "z")
            - _metric_derivative(model, params, at, jet, kc, "z", ka, "x", kb, "y")
            + lifted_inner(params, at, _bracket(model, at, jet, ka, "x", kb, "y"), C)
            + lifted_inner(params, at, _bracket(model, at, jet, kc, "z", ka, "x"), B)
            - lifted_inner(params, at, _bracket(model, at, jet, kb, "y", kc, "z"), A)
        )
        worst = np.maximum(worst, np.abs(lhs - rhs))
    return worst


def torsion_residual(
    jet: FieldJet, at: FiberPoint, model: SpaceFormModel, params: BergerParams
) -> Array:
    """Worst norm of nabla_A B - nabla_B A - [A, B] over the four kind pairs."""
    worst = np.zeros(jet.value("x").shape[:-1])
    for ka in "hv":
        for kb in "hv":
            fwd = _connection(model, params, at, jet, ka, "x", kb, "y")
            rev = _connection(model, params, at, jet, kb, "y", ka, "x")
            br = _bracket(model, at, jet, ka, "x", kb, "y")
            diff = fwd - rev - br
            worst = np.maximum(
                worst, np.sqrt(np.abs(lifted_inner(params, at, diff, diff)))
            )
    return worst


def sasaki_limit_residual(
    jet: FieldJet, at: FiberPoint, model: SpaceFormModel
) -> Array:
    """Deviation of the delta = 0 connection from the classical Sasaki one.

    The undeformed tangent-bundle connection is written out independently
    here (hh: ((nabla_X Y)^h, -1/2 (R(X, Y) xi)^v); hv: (1/2 (R(xi, Y) X)^h,
    (nabla_X Y)^v); vh: (1/2 (R(xi, X) Y)^h, 0); vv: 0) and compared against
    lifted_connection evaluated at delta = 0. Returns the worst lifted norm
    of the difference over the four kind pairs.
    """
    params0 = BergerParams(0.0)
    xi = at.xi
    X, Y = jet.value("x"), jet.value("y")
    zero = np.zeros_like(X)
    classical = {
        ("h", "h"): LiftedVector(jet.deriv("x", "y"), -0.5 * riemann(model, X, Y, xi)),
        ("h", "v"): LiftedVector(0.5 * riemann(model, xi, Y, X), jet.deriv("x", "y")),
        ("v", "h"): LiftedVector(0.5 * riemann(model, xi, X, Y), zero),
        ("v", "v"): LiftedVector(zero, zero),
    }
    worst = np.zeros(X.shape[:-1])
    for (ka, kb), expected in classical.items():
        got = _connection(model, params0, at, jet, ka, "x", kb, "y")
        diff = got - expected
        worst = np.maximum(
            worst, np.sqrt(np.abs(lifted_inner(params0, at, diff, diff)))
        )
    return worst


def compatibility_residual(
    jet: FieldJet, at: FiberPoint, model: SpaceFormModel, params: BergerParams
) -> Array:
    """Worst defect of metric compatibility against the four derivative rules.

    Each rule value must equal <<nabla_X B, C>> + <<B, nabla_X C>> with the
    matching lift kinds.
    """
    worst = np.zeros(jet.value("x").shape[:-1])
    for rule in METRIC_RULES:
        kb = "h" if rule.startswith("hh") else "v"
        kd = rule[-1]
        lhs = _metric_derivative(model, params, at, jet, kd, "x", kb, "y", kb, "z")
        rhs = lifted_inner(
            params,
            at,
            _connection(model, params, at, jet, kd, "x", kb, "y"),
            lift(kb, jet.value("z")),
        ) + lifted_inner(
            params,
            at,
            lift(kb, jet.value("y")),
            _connection(model, params, at, jet, kd, "x", kb, "z"),
        )
        worst = np.maximum(worst, np.abs(lhs - rhs))
    return worst
