"""Scenario execution: generic configured runs and the builtin check scenarios.

Every builtin is an ordinary :class:`ScenarioConfig` whose ``check`` field
selects a verification routine.  Check routines read the physical parameters
they need from the config, so a TOML file with ``check = "<name>"`` can rerun
a builtin with modified settings.  For checks that sweep something other than
time, the ``t`` column of the result rows holds the sweep value (described in
:func:`list_scenarios`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import linregress

from . import __version__
from .clocks import ClockModel, covariant_time_povm, oscillator_clock, two_level_clock
from .config import ScenarioConfig, parse_config
from .errors import ChronosimError
from .evolution import (
    dyson_first_order_clock_state,
    exact_flat_space_evolve,
    exact_grid_evolve,
    gravitational_limit_evolve,
    momentum_eigenstate_evolve,
    dispersion_rate,
    product_state,
)
from .hamiltonian import decompose_hamiltonian, total_grid_hamiltonian
from .metric import pn_metric_expansion, pn_residual
from .observables import (
    classical_average_rate,
    coherent_discrimination_demo,
    fit_rate_factor,
    quantum_dilation_measure,
    readout_distribution,
)
from .ordering import WEYL, Lambda, OrderedMonomial, expectation_of_ordered, normal_moment, polynomial
from .states import (
    GridSpec,
    PureCMState,
    auto_grid,
    dephase_momentum,
    dephase_position,
    gaussian_grid_state,
    make_gaussian_packet,
    superpose,
    to_grid,
)

UNITS = "hbar = c = 1 (G = 1 for metric checks)"


@dataclass
class ResultRow:
    t: float
    rate: float = math.nan
    residual: float = math.nan
    trace_drift: float = math.nan
    measure: float = math.nan
    extra: dict = field(default_factory=dict)
    failed: bool = False


@dataclass
class ResultRecord:
    scenario: str
    rows: list
    verdicts: dict
    fitted: dict
    config_hash: str
    metadata: dict

    @property
    def compute_failed(self) -> bool:
        return any(r.failed for r in self.rows)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


# ---------------------------------------------------------------- helpers


def clock_from_config(cfg: ScenarioConfig) -> ClockModel:
    c = cfg.clock
    if c.type == "two-level":
        return two_level_clock(c.omega, c.kappa)
    return oscillator_clock(c.omega, c.dim, c.kappa)


def ordering_from_config(cfg: ScenarioConfig):
    return WEYL if cfg.ordering.kind == "weyl" else Lambda(cfg.ordering.lambda_value)


def packets_from_config(cfg: ScenarioConfig):
    return [make_gaussian_packet(p.p_mean, p.p_spread, p.x_mean) for p in cfg.cm.packets]


def state_from_config(cfg: ScenarioConfig) -> PureCMState:
    pks = packets_from_config(cfg)
    if cfg.cm.theta is not None:
        return superpose(cfg.cm.theta, cfg.cm.phi, pks[0], pks[1])
    amps = [complex(p.amp_re, p.amp_im) for p in cfg.cm.packets]
    return PureCMState.from_terms(list(zip(amps, pks)))


def grid_from_config(cfg: ScenarioConfig, state) -> GridSpec:
    if cfg.grid.extent is None:
        return auto_grid(state, cfg.grid.n)
    centre = float(np.mean([p.x_mean for p in cfg.cm.packets]))
    half = 0.5 * cfg.grid.extent
    return GridSpec(cfg.grid.n, centre - half, centre + half)


def _fit_row(t, report, clock, **extra) -> ResultRow:
    est = fit_rate_factor(report.rho_clock, clock, clock.rho0, report.t)
    return ResultRow(t, est.s, est.residual, report.diagnostics.get("trace_drift", math.nan), extra=extra)


def _failed_row(t, exc) -> ResultRow:
    return ResultRow(t, failed=True, extra={"error": f"{type(exc).__name__}: {exc}"})


def _slope(xs, ys) -> tuple[float, float]:
    fit = linregress(np.log(xs), np.log(ys))
    return float(fit.slope), float(fit.rvalue**2)


# ---------------------------------------------------------------- generic run


def run_generic(cfg: ScenarioConfig):
    state = state_from_config(cfg)
    clock = clock_from_config(cfg)
    decomp = decompose_hamiltonian(cfg.mass, cfg.g, ordering_from_config(cfg))
    method = cfg.evolution.method
    h_total = initial = None
    if method == "exact-grid":
        grid = grid_from_config(cfg, state)
        rho_cm = to_grid(state, grid)
        initial = product_state(rho_cm, clock.rho0)
        h_total = total_grid_hamiltonian(decomp, clock, grid)
    two_packet = cfg.cm.theta is not None and method != "exact-grid"
    rows = []
    for t in cfg.evolution.t_list:
        try:
            if method == "exact-flat":
                rep = exact_flat_space_evolve(state, clock, cfg.mass, t, cfg.grid.n)
            elif method == "grav-limit":
                rep = gravitational_limit_evolve(state, clock, cfg.g, t, cfg.grid.n)
            elif method == "dyson":
                rep = dyson_first_order_clock_state(state, clock.rho0, clock, decomp, t)
            else:
                rep = exact_grid_evolve(initial, h_total, t)
            row = _fit_row(t, rep, clock)
            if two_packet:
                pks = packets_from_config(cfg)
                row.measure = quantum_dilation_measure(
                    cfg.cm.theta, cfg.cm.phi, pks[0], pks[1], clock, decomp, t, method
                )
        except ChronosimError as exc:
            row = _failed_row(t, exc)
        rows.append(row)
    return rows, {}, {}


# ---------------------------------------------------------------- checks


def check_dephasing_invariance(cfg: ScenarioConfig):
    rng = np.random.default_rng(cfg.seed)
    s0 = cfg.cm.packets[0].p_spread
    clocks = [clock_from_config(cfg), oscillator_clock(cfg.clock.omega, 5)]
    povms = [covariant_time_povm(c, 8) for c in clocks]
    half = 0.5 * (cfg.grid.extent or 2.0 * np.pi * 8.0 / (0.8 * s0))
    grid = GridSpec(cfg.grid.n, -half, half)
    states = []
    for _ in range(20):
        n = int(rng.integers(1, 5))
        pks = [
            make_gaussian_packet(
                rng.uniform(-2, 2) * s0, s0 * rng.uniform(0.8, 1.2), rng.uniform(-20, 20), rng.uniform(0, 2 * np.pi)
            )
            for _ in range(n)
        ]
        amps = rng.normal(size=n) + 1j * rng.normal(size=n)
        st = PureCMState.from_terms(list(zip(amps, pks)))
        states.append((st, dephase_momentum(st, grid)))
    coupling = max(float(np.real(normal_moment(st, 0, 2))) for st, _ in states) / (2.0 * cfg.mass**2)
    rows = []
    worst_all = 0.0
    for t in cfg.evolution.t_list:
        try:
            worst = drift = 0.0
            first = None
            for st, de in states:
                for clock, povm in zip(clocks, povms):
                    a = exact_flat_space_evolve(st, clock, cfg.mass, t, cfg.grid.n)
                    b = exact_flat_space_evolve(de, clock, cfg.mass, t)
                    pa = readout_distribution(a.rho_clock, povm)[:, 1]
                    pb = readout_distribution(b.rho_clock, povm)[:, 1]
                    worst = max(worst, float(np.max(np.abs(pa - pb))))
                    drift = max(drift, a.diagnostics["trace_drift"], b.diagnostics["trace_drift"])
                    first = first or (a, clock)
            row = _fit_row(t, first[0], first[1], n_states=len(states), n_clocks=len(clocks))
            row.trace_drift = drift
            row.measure = worst
            worst_all = max(worst_all, worst)
        except ChronosimError as exc:
            row = _failed_row(t, exc)
        rows.append(row)
    fitted = {"max_readout_difference": worst_all, "max_coupling": coupling}
    return rows, {"max_readout_difference_below_tol": worst_all < cfg.tol}, fitted


def check_kinematic_universality(cfg: ScenarioConfig):
    state = state_from_config(cfg)
    decomp = decompose_hamiltonian(cfg.mass)
    clocks = [clock_from_config(cfg), oscillator_clock(cfg.clock.omega, 5)]
    classical = classical_average_rate(state, decomp)
    coupling = float(np.real(normal_moment(state, 0, 2))) / (2.0 * cfg.mass**2)
    rows = []
    ok = True
    worst = 0.0
    for t in cfg.evolution.t_list:
        try:
            reps = [exact_flat_space_evolve(state, c, cfg.mass, t, cfg.grid.n) for c in clocks]
            fits = [fit_rate_factor(r.rho_clock, c, c.rho0, t) for r, c in zip(reps, clocks)]
            dev = abs(fits[0].s - fits[1].s) / abs(fits[1].s)
            cdev = max(abs(f.s - classical) for f in fits)
            worst = max(worst, dev)
            ok = ok and dev < cfg.tol and cdev < cfg.tol
            row = ResultRow(
                t,
                fits[0].s,
                fits[0].residual,
                max(r.diagnostics["trace_drift"] for r in reps),
                dev,
                extra={"rate_oscillator": fits[1].s, "classical_average": classical, "classical_deviation": cdev, "coupling": coupling},
            )
        except ChronosimError as exc:
            row, ok = _failed_row(t, exc), False
        rows.append(row)
    return rows, {"universal": ok}, {"max_relative_deviation": worst, "coupling": coupling}


def check_special_relativistic_limit(cfg: ScenarioConfig):
    clock = clock_from_config(cfg)
    p = cfg.cm.packets[0].p_mean
    inv_gamma = 1.0 / math.sqrt(1.0 + (p / cfg.mass) ** 2)
    secant = dispersion_rate(p, clock, cfg.mass)
    rows = []
    ok = True
    for t in cfg.evolution.t_list:
        try:
            rep = momentum_eigenstate_evolve(p, clock, cfg.mass, t)
            row = _fit_row(t, rep, clock, inverse_gamma=inv_gamma, secant_rate=secant)
            row.measure = row.rate - inv_gamma
            ok = ok and abs(row.measure) < cfg.tol
        except ChronosimError as exc:
            row, ok = _failed_row(t, exc), False
        rows.append(row)
    return rows, {"rate_matches_inverse_gamma": ok}, {"inverse_gamma": inv_gamma, "secant_rate": secant}


DYSON_CHIRP = 0.1


def check_dyson_truncation_order(cfg: ScenarioConfig):
    pk = cfg.cm.packets[0]
    extent = cfg.grid.extent or 16.0
    grid = GridSpec(cfg.grid.n, -0.5 * extent, 0.5 * extent)
    rho_cm = gaussian_grid_state(grid, pk.x_mean, 0.5 / pk.p_spread, pk.p_mean, DYSON_CHIRP)
    clock = clock_from_config(cfg)
    decomp = decompose_hamiltonian(cfg.mass, cfg.g, ordering_from_config(cfg))
    h = total_grid_hamiltonian(decomp, clock, grid)
    initial = product_state(rho_cm, clock.rho0)
    rows, ts, errs = [], [], []
    for t in cfg.evolution.t_list:
        try:
            exact = exact_grid_evolve(initial, h, t)
            dyson = dyson_first_order_clock_state(rho_cm, clock.rho0, clock, decomp, t)
            err = float(np.linalg.norm(dyson.rho_clock - exact.rho_clock))
            row = _fit_row(t, dyson, clock, exact_trace_drift=exact.diagnostics["trace_drift"])
            row.measure = err
            ts.append(t)
            errs.append(err)
        except ChronosimError as exc:
            row = _failed_row(t, exc)
        rows.append(row)
    slope, r2 = _slope(ts, errs) if len(ts) >= 2 else (math.nan, math.nan)
    verdict = abs(slope - 2.0) <= 0.15 and r2 > 0.99
    return rows, {"second_order_truncation": verdict}, {"slope": slope, "r_squared": r2}


def check_pn_residual_scaling(cfg: ScenarioConfig):
    eps = np.asarray(cfg.evolution.t_list, dtype=float)
    rows = [ResultRow(float(e), measure=float(pn_residual(e)), extra={"r0_over_r": 2.0}) for e in eps]
    slope, r2 = _slope(eps, [r.measure for r in rows])
    eps0 = 1e-3
    coeffs = pn_metric_expansion(1.0, 1.0 / eps0)
    anchor = float(abs(coeffs.g00_delta(coeffs.r0)))
    verdicts = {"slope_is_three": abs(slope - 3.0) <= 0.1, "normalized_at_r0": anchor < 1e-11}
    return rows, verdicts, {"slope": slope, "r_squared": r2, "g00_r0_minus_one": anchor}


def weyl_test_states(grid: GridSpec, seed: int, count: int = 10):
    """Gaussian (first half) and chirped Gaussian (second half) grid states."""
    rng = np.random.default_rng(seed)
    centre = 0.5 * (grid.x_min + grid.x_max)
    out = []
    for k in range(count):
        params = dict(
            x_mean=centre + rng.uniform(-4, 4),
            x_spread=rng.uniform(0.7, 1.5),
            p_mean=rng.uniform(-1.5, 1.5),
            chirp=0.0 if k < count // 2 else rng.uniform(0.05, 0.2) * rng.choice([-1, 1]),
        )
        out.append((params, gaussian_grid_state(grid, **params)))
    return out


def check_weyl_trace_equivalence(cfg: ScenarioConfig):
    extent = cfg.grid.extent or 44.0
    grid = GridSpec(cfg.grid.n, 2.0 - 0.5 * extent, 2.0 + 0.5 * extent)
    weyl = polynomial(OrderedMonomial(1.0, 2, 1))
    lam1 = polynomial(OrderedMonomial(1.0, 2, 1, Lambda(1.0)))
    states = weyl_test_states(grid, cfg.seed, len(cfg.evolution.t_list))
    rows = []
    rel_ok = imag_ok = lam_ok = True
    for t, (params, rho) in zip(cfg.evolution.t_list, states):
        try:
            op = expectation_of_ordered(weyl, rho)
            integral = expectation_of_ordered(weyl, rho, "integral")
            verbatim = expectation_of_ordered(weyl, rho, "integral", "verbatim")
            rel = abs(op - integral) / abs(op)
            p_mean = normal_moment(rho, 0, 1)
            lam_gap = abs(expectation_of_ordered(lam1, rho) - op - (-1j) * p_mean)
            rel_ok &= rel < cfg.tol
            imag_ok &= abs(op.imag) < 1e-10 * max(1.0, abs(op))
            lam_ok &= lam_gap < 1e-9
            row = ResultRow(
                t,
                measure=rel,
                extra={
                    **params,
                    "weyl_value": op.real,
                    "weyl_imag": op.imag,
                    "lambda1_prediction_gap": lam_gap,
                    "verbatim_kernel_offset_imag": (verbatim - op).imag,
                },
            )
        except ChronosimError as exc:
            row = _failed_row(t, exc)
            rel_ok = False
        rows.append(row)
    return rows, {"operator_matches_integral": rel_ok, "weyl_real": imag_ok, "lambda_shift_matches": lam_ok}, {}


def check_quantum_dilation_measure(cfg: ScenarioConfig):
    pks = packets_from_config(cfg)
    clock = clock_from_config(cfg)
    decomp = decompose_hamiltonian(cfg.mass)
    theta = cfg.cm.theta if cfg.cm.theta is not None else math.pi / 4
    t = 1.0
    far = make_gaussian_packet(pks[0].p_mean + 30 * pks[0].p_spread, pks[0].p_spread)
    disjoint = quantum_dilation_measure(theta, 0.3, pks[0], far, clock, decomp, t)
    identical = quantum_dilation_measure(theta, 0.3, pks[0], pks[0], clock, decomp, t)
    rows, values = [], []
    for phi in cfg.evolution.t_list:
        try:
            m = quantum_dilation_measure(theta, phi, pks[0], pks[1], clock, decomp, t)
            rows.append(ResultRow(phi, measure=m, extra={"overlap_abs": abs(pks[0].inner(pks[1]))}))
            values.append(m)
        except ChronosimError as exc:
            rows.append(_failed_row(phi, exc))
    verdicts = {
        "zero_for_disjoint": abs(disjoint) < 1e-10,
        "zero_for_identical": abs(identical) < 1e-10,
        "nonzero_at_overlap": bool(values) and min(abs(v) for v in values) > 1e-8,
        "phase_dependent": len(values) > 1 and (max(values) - min(values)) > 1e-8,
    }
    return rows, verdicts, {"measure_disjoint": disjoint, "measure_identical": identical}


def check_coherent_discrimination(cfg: ScenarioConfig):
    clock = clock_from_config(cfg)
    decomp = decompose_hamiltonian(cfg.mass)
    rows, ok = [], True
    for beta_im in cfg.evolution.t_list:
        beta = complex(1.0 if beta_im == 0 else 0.0, beta_im)
        try:
            res = coherent_discrimination_demo(0.0, beta, clock=clock, decomp=decomp)
            overlap = abs(res["overlap"])
            m = res["measure"]
            if overlap < 1e-30:
                ok &= abs(m) < 1e-10
            if abs(overlap - math.exp(-0.5)) < 1e-12:
                ok &= abs(m) > 1e-8
            rows.append(
                ResultRow(beta_im, measure=m, extra={"beta": [beta.real, beta.imag], "overlap_abs": overlap, "momentum_l1_distance": res["momentum_l1_distance"]})
            )
        except ChronosimError as exc:
            rows.append(_failed_row(beta_im, exc))
            ok = False
    return rows, {"zero_and_nonzero_cases": ok}, {}


def check_gravitational_nonuniversality(cfg: ScenarioConfig):
    state = state_from_config(cfg)
    template = clock_from_config(cfg)
    g, t = cfg.g, 3.0
    x_mean = float(np.real(normal_moment(state, 1, 0)))
    grid = auto_grid(state, 256)
    rows, rates = [], []
    predicted_ok = dephase_ok = True
    for kappa in cfg.evolution.t_list:
        clock = template.with_kappa(kappa)
        try:
            rep = gravitational_limit_evolve(state, clock, g, t, cfg.grid.n)
            dep = gravitational_limit_evolve(dephase_position(state, grid), clock, g, t)
            row = _fit_row(kappa, rep, clock)
            predicted = 1.0 + (1.0 + kappa) * g * x_mean
            row.measure = row.rate - predicted
            gap = float(np.max(np.abs(rep.rho_clock - dep.rho_clock)))
            row.extra = {"predicted": predicted, "position_dephasing_gap": gap}
            predicted_ok &= abs(row.measure) < 1e-8
            dephase_ok &= gap < 1e-12
            rates.append(row.rate)
        except ChronosimError as exc:
            row = _failed_row(kappa, exc)
            predicted_ok = False
        rows.append(row)
    spread = max(rates) - min(rates) if rates else math.nan
    verdicts = {
        "rates_match_prediction": predicted_ok,
        "position_dephasing_invariant": dephase_ok,
        "universality_violated": spread > cfg.tol,
    }
    return rows, verdicts, {"rate_spread": spread, "x_mean": x_mean}


# ---------------------------------------------------------------- registry


def _packet(p_mean=0.0, p_spread=1.0, x_mean=0.0, amp_re=1.0, amp_im=0.0):
    return {"amp_re": amp_re, "amp_im": amp_im, "p_mean": p_mean, "p_spread": p_spread, "x_mean": x_mean}


@dataclass(frozen=True)
class Builtin:
    description: str
    config: dict
    runner: Callable


_OVERLAP_HALF = 0.5 * math.sqrt(8.0 * math.log(2.0))

BUILTINS: dict[str, Builtin] = {
    "dephasing-invariance": Builtin(
        "readouts from pure vs momentum-dephased superpositions agree (exact flat space)",
        {
            "mass": 2.0,
            "tol": 1e-12,
            "seed": 7,
            "cm": {"packets": [_packet(p_spread=0.03)]},
            "evolution": {"method": "exact-flat", "t_list": [2.3]},
            "grid": {"n": 256, "extent": 2200.0},
        },
        check_dephasing_invariance,
    ),
    "kinematic-universality": Builtin(
        "two-level and 5-level clocks tick at the same rate, equal to the classical average",
        {
            "mass": 1e4,
            "tol": 1e-6,
            "cm": {"packets": [_packet(p_mean=141.0, p_spread=10.0)]},
            "evolution": {"method": "exact-flat", "t_list": [1.0, 2.0, 3.0]},
            "grid": {"n": 512},
        },
        check_kinematic_universality,
    ),
    "special-relativistic-limit": Builtin(
        "momentum eigenstate p = 0.75 m: fitted rate vs 1/gamma = 0.8",
        {
            "mass": 1.0,
            "tol": 1e-4,
            "clock": {"omega": 1e-3},
            "cm": {"packets": [_packet(p_mean=0.75, p_spread=1e-6)]},
            "evolution": {"method": "exact-flat", "t_list": [500.0, 1000.0, 2000.0]},
        },
        check_special_relativistic_limit,
    ),
    "dyson-truncation-order": Builtin(
        "first-order Dyson error against exact grid evolution scales as t^2",
        {
            "mass": 1.0,
            "gravity": {"enabled": True, "g": 0.05},
            "cm": {"packets": [_packet(p_mean=0.4, p_spread=0.625, x_mean=0.5)]},
            "evolution": {"method": "exact-grid", "t_list": [float(t) for t in np.logspace(-2, -1, 10)]},
            "grid": {"n": 128, "extent": 16.0},
        },
        check_dyson_truncation_order,
    ),
    "pn-residual-scaling": Builtin(
        "post-Newtonian g00 residual vs the exact metric scales as eps^3 (t column = eps)",
        {
            "tol": 0.1,
            "cm": {"packets": [_packet()]},
            "evolution": {"method": "exact-flat", "t_list": [float(e) for e in np.logspace(-5, -2, 7)]},
        },
        check_pn_residual_scaling,
    ),
    "weyl-trace-equivalence": Builtin(
        "operator and phase-space integral forms of Weyl p^2 x agree (t column = state index)",
        {
            "tol": 1e-8,
            "seed": 3,
            "cm": {"packets": [_packet()]},
            "evolution": {"method": "exact-flat", "t_list": [float(k) for k in range(10)]},
            "grid": {"n": 256, "extent": 44.0},
        },
        check_weyl_trace_equivalence,
    ),
    "quantum-dilation-measure": Builtin(
        "superposed minus mixed rate for overlap-0.5 packets (t column = phi)",
        {
            "mass": math.sqrt(500.0),
            "cm": {
                "packets": [_packet(p_mean=1.0, p_spread=0.5), _packet(p_mean=1.0 + 0.5 * 2 * _OVERLAP_HALF, p_spread=0.5)],
                "theta": math.pi / 4,
                "phi": 0.0,
            },
            "evolution": {"method": "dyson", "t_list": [0.0, math.pi / 3, 2 * math.pi / 3, math.pi]},
        },
        check_quantum_dilation_measure,
    ),
    "coherent-discrimination": Builtin(
        "coherent |0> vs its mixture with |beta>: zero for orthogonal position shifts, nonzero at overlap exp(-1/2) (t column = Im beta, 0 means beta = 1)",
        {
            "mass": 50.0,
            "cm": {"packets": [_packet(p_spread=1.0 / math.sqrt(2.0))]},
            "evolution": {"method": "dyson", "t_list": [0.0, 2.0, 12.0]},
        },
        check_coherent_discrimination,
    ),
    "gravitational-nonuniversality": Builtin(
        "gravitational-limit rates 1 + (1 + kappa) g <x> break universality (t column = kappa)",
        {
            "tol": 1e-6,
            "gravity": {"enabled": True, "g": 1e-3},
            "cm": {"packets": [_packet(p_spread=1.0, x_mean=2.0)]},
            "evolution": {"method": "grav-limit", "t_list": [0.0, 0.5, 1.0]},
        },
        check_gravitational_nonuniversality,
    ),
}

CHECKS: dict[str, Callable] = {name: b.runner for name, b in BUILTINS.items()}


def list_scenarios() -> list[tuple[str, str]]:
    return [(name, b.description) for name, b in BUILTINS.items()]


def builtin_config(name: str) -> ScenarioConfig:
    b = BUILTINS[name]
    return parse_config({"name": name, "check": name, **b.config})


def run_scenario(cfg: ScenarioConfig) -> ResultRecord:
    if cfg.check is not None and cfg.check not in CHECKS:
        raise ChronosimError(f"unknown check {cfg.check!r}; known: {', '.join(CHECKS)}")
    runner = CHECKS[cfg.check] if cfg.check else run_generic
    rows, verdicts, fitted = runner(cfg)
    metadata = {"units": UNITS, "version": __version__, "config_hash": cfg.config_hash()}
    return ResultRecord(cfg.name, rows, verdicts, fitted, cfg.config_hash(), metadata)
