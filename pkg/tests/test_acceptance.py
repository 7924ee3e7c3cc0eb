"""Acceptance battery: one numbered check per shipped claim.

Each test prints a single verdict line with the measured value next to its
bound, then asserts. Two checks encode claims about full-bundle trajectories
that the implemented dynamics do not exhibit (the twisted operator stays
constant on TM as well, to machine precision); they fail, and their verdict
lines carry the measured evidence. See README for the analysis.
"""

import json
import time

import numpy as np

from bergerflow.cli import main
from bergerflow.experiments import _halving_factor
from bergerflow.flow import (
    BundleState,
    FlowConfig,
    conserved_report,
    integrate,
    random_initial_states,
    twisted_rate_check,
)
from bergerflow.frenet import (
    algebraic_chain,
    constancy_summary,
    curvature_profile,
    gram_profile,
    numeric_chain,
    span_residuals,
    vanishing_summary,
)
from bergerflow.lifted import FiberPoint, random_jet
from bergerflow.lifted import (
    koszul_residual,
    sasaki_limit_residual,
    torsion_residual,
)
from bergerflow.space_form import BergerParams, SpaceFormModel, apply_J, inner

DELTAS = (0.0, 0.5, 2.0)
RADII = (0.3, 1.0, 1.7)
CURVATURES = (0.0, 4.0, -2.0)
COMPLEX_DIMS = (1, 2, 4)


def _verdict(label, ok, detail):
    line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _single(states, i=0):
    return BundleState(states.u[i], states.xi[i], states.w[i])


def test_01_connection_identities():
    rng = np.random.default_rng(0)
    start = time.perf_counter()
    worst = 0.0
    for n in COMPLEX_DIMS:
        for m in CURVATURES:
            model = SpaceFormModel(n, m)
            for delta in DELTAS:
                params = BergerParams(delta)
                for radius in RADII:
                    jet = random_jet(rng, model.dim, (1000,))
                    xi = rng.normal(size=(1000, model.dim))
                    xi *= radius / np.linalg.norm(xi, axis=-1, keepdims=True)
                    at = FiberPoint(xi)
                    worst = max(
                        worst,
                        float(np.max(koszul_residual(jet, at, model, params))),
                        float(np.max(torsion_residual(jet, at, model, params))),
                    )
    elapsed = time.perf_counter() - start
    _verdict(
        "criterion 01 connection identities",
        worst <= 1e-10 and elapsed < 10.0,
        f"worst residual {worst:.3e} <= 1e-10, {elapsed:.1f} s < 10 s",
    )


def test_02_undeformed_limit():
    rng = np.random.default_rng(1)
    worst = 0.0
    for n in COMPLEX_DIMS:
        for m in CURVATURES:
            model = SpaceFormModel(n, m)
            for radius in RADII:
                jet = random_jet(rng, model.dim, (200,))
                xi = rng.normal(size=(200, model.dim))
                xi *= radius / np.linalg.norm(xi, axis=-1, keepdims=True)
                worst = max(
                    worst,
                    float(np.max(sasaki_limit_residual(jet, FiberPoint(xi), model))),
                )
    _verdict(
        "criterion 02 undeformed limit",
        worst <= 1e-12,
        f"worst residual {worst:.3e} <= 1e-12",
    )


def test_03_conservation_and_integrator_order():
    model = SpaceFormModel(2, 4.0)
    params = BergerParams(0.8)
    state = _single(random_initial_states(model, params, "T1M", 1, np.random.default_rng(2)))
    cfg = FlowConfig(bundle="T1M", step=1e-3, sigma_max=20.0, sample_stride=10)
    drifts = conserved_report(integrate(state, model, params, cfg))
    worst = max(
        drifts[k]
        for k in ("fiber_norm", "tangency", "fiber_speed", "twist_momentum", "lifted_speed")
    )
    factor = _halving_factor(model, params, "T1M", state)
    _verdict(
        "criterion 03 conservation and integrator order",
        worst <= 1e-8 and 14.0 <= factor <= 18.0,
        f"worst drift {worst:.3e} <= 1e-8, halving factor {factor:.2f} in [14, 18]",
    )


def _rate_trajectory(bundle, state, model, params):
    cfg = FlowConfig(bundle=bundle, step=1e-3, sigma_max=5.0, sample_stride=10)
    return twisted_rate_check(model, params, integrate(state, model, params, cfg))


def test_04a_unit_bundle_operator_rate():
    model = SpaceFormModel(4, 4.0)
    params = BergerParams(0.5)
    state = _single(random_initial_states(model, params, "T1M", 1, np.random.default_rng(3)))
    rate = _rate_trajectory("T1M", state, model, params)
    _verdict(
        "criterion 04a unit-bundle operator rate",
        rate["fd_rate"] <= 1e-6,
        f"fd rate {rate['fd_rate']:.3e} <= 1e-6",
    )


def test_04b_full_bundle_rate_matches_closed_form():
    model = SpaceFormModel(4, 4.0)
    params = BergerParams(1.0)
    rng = np.random.default_rng(4)
    xi_hat = rng.normal(size=8)
    xi_hat /= np.linalg.norm(xi_hat)
    perp = rng.normal(size=8)
    perp -= inner(perp, xi_hat) * xi_hat
    perp -= inner(perp, apply_J(xi_hat)) * apply_J(xi_hat)
    perp /= np.linalg.norm(perp)
    w0 = 0.35 * apply_J(xi_hat) + 0.30 * xi_hat + 0.35 * perp
    xi0 = 0.5 * xi_hat
    lam2 = inner(w0, w0) + params.delta**2 * inner(w0, apply_J(xi0)) ** 2
    u_dir = rng.normal(size=8)
    u0 = np.sqrt(1.0 - lam2) * u_dir / np.linalg.norm(u_dir)
    rate = _rate_trajectory("TM", BundleState(u0, xi0, w0), model, params)
    _verdict(
        "criterion 04b full-bundle rate matches closed form",
        rate["mismatch_rel"] <= 1e-5,
        f"relative mismatch {rate['mismatch_rel']:.3e} <= 1e-5; "
        f"fd rate {rate['fd_rate']:.3e} vs closed form {rate['closed_form_rate']:.3e}",
    )


def test_05_chain_oracle_agreement():
    model = SpaceFormModel(4, 4.0)
    params = BergerParams(0.5)
    state = _single(random_initial_states(model, params, "T1M", 1, np.random.default_rng(5)))
    cfg = FlowConfig(bundle="T1M", step=1e-3, sigma_max=5.0, sample_stride=1)
    traj = integrate(state, model, params, cfg)
    center = traj.n_samples // 2
    ref = algebraic_chain(
        model, params, traj.u[center], traj.xi[center], traj.w[center], 4
    )
    errors = {}
    for stride in (4, 2, 1):
        sub = traj.u[center % stride :: stride]
        est = numeric_chain(sub, 1e-3 * stride, center // stride, 4)
        rel = np.linalg.norm(est[1:] - ref[1:], axis=-1) / np.linalg.norm(
            ref[1:], axis=-1
        )
        errors[stride] = float(np.max(rel))
    ratios = (errors[4] / errors[2], errors[2] / errors[1])
    second_order = all(2.5 <= r <= 5.5 for r in ratios)
    _verdict(
        "criterion 05 chain oracle agreement",
        errors[1] <= 1e-4 and second_order,
        f"worst relative error {errors[1]:.3e} <= 1e-4, halving ratios "
        f"{ratios[0]:.2f}, {ratios[1]:.2f} near 4",
    )


def test_06_chain_norms_and_projected_speed():
    model = SpaceFormModel(4, 4.0)
    params = BergerParams(0.5)
    state = _single(random_initial_states(model, params, "T1M", 1, np.random.default_rng(6)))
    cfg = FlowConfig(bundle="T1M", step=1e-3, sigma_max=20.0, sample_stride=10)
    traj = integrate(state, model, params, cfg)
    chains = algebraic_chain(model, params, traj.u, traj.xi, traj.w, 6)
    norms = np.linalg.norm(chains, axis=-1)
    drift = float(np.max((norms.max(axis=0) - norms.min(axis=0)) / norms.mean(axis=0)))
    expected = np.sqrt(
        np.clip(1.0 - traj.c**2 - params.delta**2 * traj.mu**2, 0.0, None)
    )
    speed_err = float(np.max(np.abs(np.linalg.norm(traj.u, axis=-1) - expected)))
    _verdict(
        "criterion 06 chain norms and projected speed",
        drift <= 1e-7 and speed_err <= 1e-10,
        f"norm drift {drift:.3e} <= 1e-7, speed identity {speed_err:.3e} <= 1e-10",
    )


def test_07_curvature_constancy_sweep():
    model = SpaceFormModel(4, 4.0)
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    worst = 0.0
    for delta in (0.3, 0.9):
        params = BergerParams(delta)
        states = random_initial_states(model, params, "T1M", 25, rng)
        cfg = FlowConfig(bundle="T1M", step=1e-3, sigma_max=19.6, sample_stride=400)
        traj = integrate(states, model, params, cfg)
        assert traj.n_samples == 50
        chains = algebraic_chain(model, params, traj.u, traj.xi, traj.w, 8)
        summary = constancy_summary(gram_profile(chains))
        assert summary["curvatures_checked"] == 5
        worst = max(worst, summary["worst_relative_variation"])
    elapsed = time.perf_counter() - start
    _verdict(
        "criterion 07 curvature constancy sweep",
        worst <= 1e-6 and elapsed < 60.0,
        f"worst k_1..k_5 variation {worst:.3e} <= 1e-6 over 50 configs, "
        f"{elapsed:.1f} s < 60 s",
    )


def test_08_high_order_vanishing_sweep():
    model = SpaceFormModel(4, 4.0)
    rng = np.random.default_rng(8)
    worst_k = 0.0
    worst_tail = 0.0
    counterexample = ""
    for delta, count in ((0.0, 34), (0.5, 33), (1.2, 33)):
        params = BergerParams(delta)
        states = random_initial_states(model, params, "T1M", count, rng)
        cfg = FlowConfig(bundle="T1M", step=1e-3, sigma_max=5.0, sample_stride=500)
        traj = integrate(states, model, params, cfg)
        chains = algebraic_chain(model, params, traj.u, traj.xi, traj.w, 8)
        profile = gram_profile(chains)
        summary = vanishing_summary(profile)
        if summary["worst_first_zero_curvature"] > max(worst_k, 1e-7):
            k6 = profile.raw_curvature(6)
            bad = int(np.argmax(np.max(k6, axis=0)))
            counterexample = (
                f"; counterexample delta={delta}"
                f" u0={states.u[bad].tolist()}"
                f" xi0={states.xi[bad].tolist()}"
                f" w0={states.w[bad].tolist()}"
            )
        worst_k = max(worst_k, summary["worst_first_zero_curvature"])
        worst_tail = max(worst_tail, summary["worst_tail_ratio"])
        assert summary["first_zero_index_max"] == 6
    _verdict(
        "criterion 08 high-order vanishing sweep",
        worst_k <= 1e-7 and worst_tail <= 1e-12,
        f"worst k_6 / max(k_1, 1) = {worst_k:.3e} <= 1e-7, trailing Gram "
        f"ratio {worst_tail:.3e} <= 1e-12 over 100 configs{counterexample}",
    )


def test_09_power_span_identities():
    model = SpaceFormModel(4, 4.0)
    rng = np.random.default_rng(9)
    worst = 0.0
    for delta in (0.0, 0.5, 1.2):
        params = BergerParams(delta)
        states = random_initial_states(model, params, "T1M", 10, rng)
        for i in range(10):
            res = span_residuals(model, params, states.xi[i], states.w[i], qmax=5)
            worst = max(worst, float(res.max()))
    _verdict(
        "criterion 09 power span identities",
        worst <= 1e-10,
        f"worst least-squares residual {worst:.3e} <= 1e-10",
    )


def test_10_full_bundle_first_curvature_diverges():
    model = SpaceFormModel(4, 4.0)
    params = BergerParams(0.5)
    state = _single(random_initial_states(model, params, "T1M", 1, np.random.default_rng(10)))
    unit_cfg = FlowConfig(bundle="T1M", step=1e-3, sigma_max=19.6, sample_stride=400)
    unit_traj = integrate(state, model, params, unit_cfg)
    unit_chains = algebraic_chain(
        model, params, unit_traj.u, unit_traj.xi, unit_traj.w, 8
    )
    unit_summary = constancy_summary(gram_profile(unit_chains[:, None]))
    assert unit_summary["worst_relative_variation"] <= 1e-6
    scaled = BundleState(state.u, 0.5 * state.xi, state.w)
    full_cfg = FlowConfig(bundle="TM", step=1e-3, sigma_max=20.0, sample_stride=10)
    full_traj = integrate(scaled, model, params, full_cfg)
    profile = curvature_profile(
        full_traj, model, params, 4, chain_kind="numeric", stride=40
    )
    k1 = profile.raw_curvature(1)
    variation = float((np.max(k1) - np.min(k1)) / np.mean(k1))
    _verdict(
        "criterion 10 full-bundle first-curvature divergence",
        variation > 1e-2,
        f"k_1 relative variation {variation:.3e} > 1e-2 on the rescaled run; "
        f"matched unit-bundle variation {unit_summary['worst_relative_variation']:.3e}",
    )


def test_11_deterministic_reports(tmp_path, capsys):
    args = ["theorems", "--samples", "4", "--sigma-max", "2", "--seed", "5"]
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    code_a = main(args + ["--out", str(out_a)])
    code_b = main(args + ["--out", str(out_b)])
    capsys.readouterr()
    bytes_a = (out_a / "theorems_report.json").read_bytes()
    bytes_b = (out_b / "theorems_report.json").read_bytes()
    identical = bytes_a == bytes_b and code_a == code_b
    json.loads(bytes_a)
    _verdict(
        "criterion 11 deterministic reports",
        identical,
        f"{len(bytes_a)} byte report identical across repeated runs",
    )
