"""Threshold solvers and the SNR sweep comparing all schemes.

The two-interval objectives are only provably well behaved in the
infinite-power limit, so the scalar solvers hedge: a coarse scan plus
derivative-bisection refinement from several brackets, best candidate wins.
The three-interval scheme has no usable structure at all and is solved by
exhaustive 2-D grid search, vectorized over the whole grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import schemes, sim
from .numerics import (
    ConvergenceError,
    Interval,
    OPEN_END,
    ToleranceSpec,
    grid_argmax_2d,
    integrate,
    maximize_scalar,
)
from .schemes import (
    HTTPolicy,
    IPPolicy,
    PIPolicy,
    PIPPolicy,
    Policy,
    SystemParams,
)

SCHEME_TAGS = ("htt", "ip", "pi", "pip")
SOLVE_METHODS = ("closed-form", "quadrature", "monte-carlo")

# Two-interval thresholds are searched down to this floor instead of 0: the
# IP power expression is 0/0 at the origin and both objectives vanish there.
_THRESHOLD_FLOOR = 1e-6
_COARSE_POINTS = 201


@dataclass(frozen=True)
class SolveConfig:
    """Search-space and evaluation settings shared by all solvers.

    gain_cap bounds the threshold search (the searchable gain range);
    grid_step is the exhaustive-search resolution for the PIP scheme.
    """

    gain_cap: float = 10.0
    grid_step: float = 0.01
    tol: ToleranceSpec = field(default_factory=lambda: ToleranceSpec(abs_tol=1e-7))
    method: str = "closed-form"
    mc_samples: int = 100_000
    mc_seed: int = 12345

    def __post_init__(self) -> None:
        if not self.gain_cap > 0.0:
            raise ValueError("gain_cap must be positive")
        if not 0.0 < self.grid_step < self.gain_cap:
            raise ValueError("grid_step must lie in (0, gain_cap)")
        if self.method not in SOLVE_METHODS:
            raise ValueError(f"method must be one of {SOLVE_METHODS}")
        if self.mc_samples < 2:
            raise ValueError("mc_samples must be >= 2")


@dataclass(frozen=True)
class SolveResult:
    scheme: str
    policy: Policy
    throughput_bits: float
    ul_power: float
    at_boundary: bool = False
    tau_mean: float | None = None


@dataclass(frozen=True)
class SweepPoint:
    snr_db: float
    scheme: str
    g_l: float | None
    g_u: float | None
    tau_mean: float | None
    ul_power: float
    throughput_bits: float
    error: str | None = None


@dataclass(frozen=True)
class ThroughputCurve:
    points: tuple[SweepPoint, ...]

    def by_scheme(self, scheme: str) -> list[SweepPoint]:
        return [p for p in self.points if p.scheme == scheme]


def _objective_1d(scheme: str, params: SystemParams, cfg: SolveConfig):
    closed = {
        "ip": lambda x: schemes.ip_throughput(x, params),
        "pi": lambda x: schemes.pi_throughput(x, params),
    }[scheme]
    if cfg.method == "closed-form":
        return closed
    policy_of = {"ip": IPPolicy, "pi": PIPolicy}[scheme]
    if cfg.method == "quadrature":
        def via_quadrature(x: float) -> float:
            policy = policy_of(x)
            part = schemes.policy_partition(policy)
            pu = schemes.balance_ul_power(part, params)
            return schemes.quad_throughput_oracle(part, pu, params)
        return via_quadrature

    def via_monte_carlo(x: float) -> float:
        # common random numbers keep the noisy objective coherent in x
        return sim.mc_throughput(policy_of(x), params, cfg.mc_samples, cfg.mc_seed).mean
    return via_monte_carlo


def _solve_threshold(scheme: str, params: SystemParams, cfg: SolveConfig,
                     lo: float) -> tuple[float, float, bool]:
    f = _objective_1d(scheme, params, cfg)
    cap = cfg.gain_cap
    xs = np.linspace(lo, cap, _COARSE_POINTS)
    try:
        coarse = np.asarray(f(xs), dtype=float)
        if coarse.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        coarse = np.asarray([f(float(x)) for x in xs], dtype=float)
    i0 = int(np.argmax(coarse))
    step = xs[1] - xs[0]

    best_x, best_v = float(xs[i0]), float(coarse[i0])
    brackets = [
        (max(lo, xs[i0] - 2.0 * step), min(cap, xs[i0] + 2.0 * step)),
        (lo, lo + 0.4 * (cap - lo)),
        (lo + 0.2 * (cap - lo), lo + 0.7 * (cap - lo)),
        (lo + 0.5 * (cap - lo), cap),
    ]
    for a, b in brackets:
        x, v = maximize_scalar(f, Interval(float(a), float(b)), cfg.tol)
        if v > best_v:
            best_x, best_v = float(x), float(v)
    at_boundary = bool(cap - best_x <= max(cfg.grid_step, float(step)))
    return best_x, best_v, at_boundary


def solve_ip(params: SystemParams, cfg: SolveConfig | None = None) -> SolveResult:
    """Best transmit-below threshold g_u in (0, gain_cap]."""
    cfg = cfg or SolveConfig()
    g_u, value, boundary = _solve_threshold("ip", params, cfg, _THRESHOLD_FLOOR)
    policy = IPPolicy(g_u=g_u)
    return SolveResult(
        scheme="ip", policy=policy, throughput_bits=value,
        ul_power=schemes.ip_ul_power(g_u, params), at_boundary=boundary,
    )


def solve_pi(params: SystemParams, cfg: SolveConfig | None = None) -> SolveResult:
    """Best transmit-above threshold g_l in [0, gain_cap]."""
    cfg = cfg or SolveConfig()
    g_l, value, boundary = _solve_threshold("pi", params, cfg, 0.0)
    policy = PIPolicy(g_l=g_l)
    return SolveResult(
        scheme="pi", policy=policy, throughput_bits=value,
        ul_power=schemes.pi_ul_power(g_l, params), at_boundary=boundary,
    )


def solve_pip(params: SystemParams, cfg: SolveConfig | None = None) -> SolveResult:
    """Exhaustive grid search over 0 <= g_l < g_u <= gain_cap.

    The search always scores the closed form (the only affordable objective
    on ~1e6 grid points); use ``quad_throughput_oracle`` to spot-check the
    winner if needed.
    """
    cfg = cfg or SolveConfig()
    if cfg.gain_cap < 2.0 * cfg.grid_step:
        raise ValueError("gain_cap below 2*grid_step leaves no feasible (g_l, g_u) pair")

    def objective(gl, gu):
        return schemes.pip_throughput(gl, gu, params)

    box = Interval(0.0, cfg.gain_cap)
    (g_l, g_u), value = grid_argmax_2d(
        objective, (box, box), cfg.grid_step, constraint=lambda a, b: a < b
    )
    policy = PIPPolicy(g_l=g_l, g_u=g_u)
    return SolveResult(
        scheme="pip", policy=policy, throughput_bits=value,
        ul_power=schemes.pip_ul_power(g_l, g_u, params),
        at_boundary=bool(cfg.gain_cap - g_u <= cfg.grid_step),
    )


def solve_htt(params: SystemParams, cfg: SolveConfig | None = None) -> SolveResult:
    """Per-frame optimal split policy and its fading-averaged throughput."""
    cfg = cfg or SolveConfig()
    if cfg.method == "monte-carlo":
        ev = schemes.htt_ergodic_throughput(
            params, method="monte-carlo", n=cfg.mc_samples, seed=cfg.mc_seed
        )
    else:
        ev = schemes.htt_ergodic_throughput(params, method="quadrature")
    tau_mean = integrate(
        lambda g: _tau_of_gain(g, params) * math.exp(-g), 0.0, OPEN_END
    )
    return SolveResult(
        scheme="htt", policy=HTTPolicy(), throughput_bits=ev.throughput_bits,
        ul_power=ev.ul_power, tau_mean=tau_mean,
    )


def _tau_of_gain(g: float, params: SystemParams) -> float:
    gamma = schemes.htt_instant_snr(g, params)
    return 1.0 if gamma <= 0.0 else float(schemes.htt_optimal_tau(gamma))


_SOLVERS = {
    "htt": solve_htt,
    "ip": solve_ip,
    "pi": solve_pi,
    "pip": solve_pip,
}


def _sweep_point(snr_db: float, result: SolveResult) -> SweepPoint:
    policy = result.policy
    g_l = getattr(policy, "g_l", None)
    g_u = getattr(policy, "g_u", None)
    return SweepPoint(
        snr_db=snr_db, scheme=result.scheme, g_l=g_l, g_u=g_u,
        tau_mean=result.tau_mean, ul_power=result.ul_power,
        throughput_bits=result.throughput_bits,
    )


def sweep(start_db: float, stop_db: float, step_db: float,
          schemes_to_run=SCHEME_TAGS,
          params_template: SystemParams | None = None,
          cfg: SolveConfig | None = None) -> ThroughputCurve:
    """Optimize each scheme across a downlink-SNR range.

    Each point fixes p_d gbar^2/sigma^2 to the point's SNR (gbar and sigma2
    taken from ``params_template``). A failing solve flags its point and the
    sweep continues; output is ordered by (snr_db, scheme).
    """
    if step_db <= 0.0:
        raise ValueError("step_db must be positive")
    cfg = cfg or SolveConfig()
    tags = sorted(set(schemes_to_run))
    unknown = [t for t in tags if t not in SCHEME_TAGS]
    if unknown:
        raise ValueError(f"unknown scheme tags: {unknown}")
    gbar = params_template.gbar if params_template else 1.0
    sigma2 = params_template.sigma2 if params_template else 1.0

    n_points = int(math.floor((stop_db - start_db) / step_db + 1e-9)) + 1
    points: list[SweepPoint] = []
    for k in range(n_points):
        snr_db = start_db + k * step_db
        params = SystemParams.from_snr_db(snr_db, gbar=gbar, sigma2=sigma2)
        for tag in tags:
            try:
                points.append(_sweep_point(snr_db, _SOLVERS[tag](params, cfg)))
            except (ValueError, ArithmeticError, ConvergenceError) as exc:
                points.append(SweepPoint(
                    snr_db=snr_db, scheme=tag, g_l=None, g_u=None, tau_mean=None,
                    ul_power=math.nan, throughput_bits=math.nan, error=str(exc),
                ))
    return ThroughputCurve(points=tuple(points))
