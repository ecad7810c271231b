"""Closed-form throughput and uplink-power evaluators.

Four transmit strategies for a single-antenna wireless-powered link:

* HTT   -- every frame is split: a fraction tau harvests downlink power,
           the rest transmits uplink data with the energy just harvested.
* IP    -- whole frames: transmit when the normalized gain is below g_u,
           harvest above (information interval left of the power interval).
* PI    -- transmit above g_l, harvest below.
* PIP   -- transmit on the middle band [g_l, g_u), harvest on both tails.

For the threshold schemes the uplink power is the constant that balances
expected harvested and expected consumed energy; the ergodic throughput then
has a closed form in the exponential integral. Every closed form is checked
against ``quad_throughput_oracle`` (direct quadrature of the rate integral),
which is the ground truth throughout the test suite.

All throughputs are in bits per unit frame (equal to bits/s/Hz here since
frame length and bandwidth are fixed at one).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import channel
from .numerics import (
    Interval,
    OPEN_END,
    exp_scaled_e1,
    integrate,
    lambert_w0,
)

LN2 = math.log(2.0)
_TAU_AT_UNIT_SNR = 1.0 - 1.0 / math.e  # limit of the optimal split at SNR 1


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the link.

    p_d     downlink transmit power (W)
    gbar    average channel power gain (dimensionless)
    sigma2  receiver noise variance (W)

    Frame length and bandwidth are fixed at one; rates in bits/frame.
    """

    p_d: float
    gbar: float = 1.0
    sigma2: float = 1.0
    frame_T: float = 1.0
    bandwidth: float = 1.0

    def __post_init__(self) -> None:
        if not self.p_d > 0.0:
            raise ValueError("p_d must be positive")
        if not self.gbar > 0.0:
            raise ValueError("gbar must be positive")
        if not self.sigma2 > 0.0:
            raise ValueError("sigma2 must be positive")
        if self.frame_T != 1.0 or self.bandwidth != 1.0:
            raise ValueError("the model is normalized to unit frame length and bandwidth")

    @property
    def dl_snr(self) -> float:
        """Downlink-referenced SNR p_d gbar^2 / sigma^2 (the sweep axis)."""
        return self.p_d * self.gbar**2 / self.sigma2

    @classmethod
    def from_snr_db(cls, snr_db: float, gbar: float = 1.0, sigma2: float = 1.0) -> "SystemParams":
        """Build params with p_d chosen so that dl_snr equals 10^(snr_db/10)."""
        rho = 10.0 ** (snr_db / 10.0)
        return cls(p_d=rho * sigma2 / gbar**2, gbar=gbar, sigma2=sigma2)


@dataclass(frozen=True)
class Partition:
    """Disjoint information (wit) and power (wpt) gain sets covering [0, inf)."""

    wit: tuple[Interval, ...]
    wpt: tuple[Interval, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "wit", tuple(self.wit))
        object.__setattr__(self, "wpt", tuple(self.wpt))
        for name, intervals in (("wit", self.wit), ("wpt", self.wpt)):
            for prev, cur in zip(intervals, intervals[1:]):
                if cur.lo < prev.hi:
                    raise ValueError(f"{name} intervals must be sorted and disjoint")
        pieces = sorted(
            [iv for iv in self.wit + self.wpt if not iv.empty], key=lambda iv: iv.lo
        )
        if not pieces:
            raise ValueError("partition covers nothing")
        if pieces[0].lo != 0.0:
            raise ValueError("partition must start at 0")
        for prev, cur in zip(pieces, pieces[1:]):
            if cur.lo < prev.hi:
                raise ValueError("wit and wpt intervals overlap")
            if cur.lo > prev.hi:
                raise ValueError(f"partition leaves a gap at [{prev.hi}, {cur.lo})")
        if not pieces[-1].unbounded:
            raise ValueError("partition must extend to infinity")

    def wit_prob(self) -> float:
        return sum(channel.interval_prob(iv.lo, iv.hi) for iv in self.wit)

    def wpt_gain_mean(self) -> float:
        return sum(channel.interval_gain_mean(iv.lo, iv.hi) for iv in self.wpt)


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HTTPolicy:
    """Per-frame split policy; ``tau_rule`` None means the per-frame optimum."""

    tau_rule: Callable[[float], float] | None = None


@dataclass(frozen=True)
class IPPolicy:
    g_u: float

    def __post_init__(self) -> None:
        if not self.g_u > 0.0:
            raise ValueError("IP policy requires g_u > 0")


@dataclass(frozen=True)
class PIPolicy:
    g_l: float

    def __post_init__(self) -> None:
        if self.g_l < 0.0 or math.isnan(self.g_l):
            raise ValueError("PI policy requires g_l >= 0")


@dataclass(frozen=True)
class PIPPolicy:
    g_l: float
    g_u: float

    def __post_init__(self) -> None:
        if self.g_l < 0.0 or math.isnan(self.g_l):
            raise ValueError("PIP policy requires g_l >= 0")
        if not self.g_u > self.g_l:
            raise ValueError("PIP policy requires g_l < g_u")


Policy = Union[HTTPolicy, IPPolicy, PIPolicy, PIPPolicy]


def policy_partition(policy: Policy) -> Partition:
    """Information/power gain sets induced by a threshold policy."""
    if isinstance(policy, IPPolicy):
        return Partition(
            wit=(Interval(0.0, policy.g_u),), wpt=(Interval(policy.g_u, OPEN_END),)
        )
    if isinstance(policy, PIPolicy):
        wpt = () if policy.g_l == 0.0 else (Interval(0.0, policy.g_l),)
        return Partition(wit=(Interval(policy.g_l, OPEN_END),), wpt=wpt)
    if isinstance(policy, PIPPolicy):
        lower = () if policy.g_l == 0.0 else (Interval(0.0, policy.g_l),)
        return Partition(
            wit=(Interval(policy.g_l, policy.g_u),),
            wpt=lower + (Interval(policy.g_u, OPEN_END),),
        )
    raise ValueError(f"no gain partition for policy {policy!r}")


@dataclass(frozen=True)
class SchemeEvaluation:
    """Throughput (bits/frame), uplink power (W), expected uplink SNR."""

    throughput_bits: float
    ul_power: float
    expected_ul_snr_gammabar: float


# ---------------------------------------------------------------------------
# HTT
# ---------------------------------------------------------------------------

def htt_instant_snr(g, params: SystemParams):
    """Per-frame SNR p_d gbar^2 g^2 / sigma^2 at normalized gain g."""
    arr = np.asarray(g, dtype=float)
    if np.any(arr < 0.0) or np.isnan(arr).any():
        raise ValueError("gain must be >= 0")
    out = params.p_d * params.gbar**2 * np.square(arr) / params.sigma2
    return float(out) if arr.ndim == 0 else out


def htt_instant_rate(g, tau, params: SystemParams):
    """Frame rate (1 - tau) log2(1 + gamma tau/(1 - tau)); zero at tau = 1."""
    g_arr = np.asarray(g, dtype=float)
    t_arr = np.asarray(tau, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0) or np.isnan(t_arr).any():
        raise ValueError("tau must lie in [0, 1]")
    gamma = htt_instant_snr(g_arr, params)
    full = t_arr == 1.0
    safe_t = np.where(full, 0.0, t_arr)
    rate = (1.0 - safe_t) * np.log1p(gamma * safe_t / (1.0 - safe_t)) / LN2
    out = np.where(full, 0.0, rate)
    scalar = g_arr.ndim == 0 and t_arr.ndim == 0
    return float(out) if scalar else out


def htt_optimal_tau(gamma):
    """Rate-maximizing harvest fraction for a frame at SNR gamma > 0.

    tau* = (gamma - 1 - W0((gamma-1)/e)) / ((W0((gamma-1)/e) + 1)(gamma - 1)),
    continued through gamma = 1 with its limit 1 - 1/e. Verified against a
    dense grid search of the frame rate in the test suite.
    """
    arr = np.asarray(gamma, dtype=float)
    if np.any(arr <= 0.0) or np.isnan(arr).any():
        raise ValueError("htt_optimal_tau requires gamma > 0")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    w = np.atleast_1d(lambert_w0((arr - 1.0) / math.e))
    denom = (w + 1.0) * (arr - 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = (arr - 1.0 - w) / denom
    # W0 rounds to exactly -1 once gamma drops below ~1e-32; use the
    # small-gamma asymptote 1 - sqrt(gamma/2) there
    tau = np.where(denom == 0.0, 1.0 - np.sqrt(arr / 2.0), tau)
    tau = np.where(np.abs(arr - 1.0) < 1e-9, _TAU_AT_UNIT_SNR, tau)
    tau = np.clip(tau, 0.0, 1.0 - 1e-16)
    return float(tau[0]) if scalar else tau


def _htt_opt_rate(g, params: SystemParams):
    g_arr = np.atleast_1d(np.asarray(g, dtype=float))
    gamma = htt_instant_snr(g_arr, params)
    live = gamma > 0.0
    rate = np.zeros_like(g_arr)
    if live.any():
        tau = htt_optimal_tau(gamma[live])
        rate[live] = htt_instant_rate(g_arr[live], tau, params)
    return rate if np.ndim(g) else float(rate[0])


def _htt_frame_power(g, params: SystemParams):
    """Uplink power tau/(1-tau) p_d gbar g the optimal split spends at gain g."""
    g_arr = np.atleast_1d(np.asarray(g, dtype=float))
    gamma = htt_instant_snr(g_arr, params)
    live = gamma > 0.0
    p = np.zeros_like(g_arr)
    if live.any():
        tau = htt_optimal_tau(gamma[live])
        p[live] = tau / (1.0 - tau) * params.p_d * params.gbar * g_arr[live]
    return p if np.ndim(g) else float(p[0])


def htt_ergodic_throughput(params: SystemParams, method: str = "quadrature",
                           n: int = 100_000, seed: int = 0) -> SchemeEvaluation:
    """Fading-averaged rate of the per-frame-optimal split.

    ``method`` selects the averaging: "quadrature" integrates against the
    gain density, "monte-carlo" averages over ``n`` seeded draws. The
    reported uplink power is the fading-averaged per-frame power.
    """
    if method == "quadrature":
        rate = integrate(lambda g: _htt_opt_rate(g, params) * math.exp(-g), 0.0, OPEN_END)
        mean_pu = integrate(lambda g: _htt_frame_power(g, params) * math.exp(-g), 0.0, OPEN_END)
    elif method == "monte-carlo":
        if n < 1:
            raise ValueError("monte-carlo requires n >= 1")
        draws = channel.sample(n, seed).values
        rate = float(np.mean(_htt_opt_rate(draws, params)))
        mean_pu = float(np.mean(_htt_frame_power(draws, params)))
    else:
        raise ValueError(f"unknown method {method!r}")
    return SchemeEvaluation(
        throughput_bits=rate,
        ul_power=mean_pu,
        expected_ul_snr_gammabar=mean_pu * params.gbar / params.sigma2,
    )


# ---------------------------------------------------------------------------
# Threshold schemes: uplink power from the energy balance
# ---------------------------------------------------------------------------

def balance_ul_power(partition: Partition, params: SystemParams) -> float:
    """Constant uplink power equating expected consumed and harvested energy.

    p_u = p_d gbar * (integral of g e^{-g} over wpt) / (P(g in wit)).
    """
    harvested = partition.wpt_gain_mean()
    if harvested == 0.0:
        return 0.0
    prob_wit = partition.wit_prob()
    if prob_wit <= 0.0:
        raise ValueError("information set has zero probability; uplink power is unbounded")
    return params.p_d * params.gbar * harvested / prob_wit


def ip_ul_power(g_u, params: SystemParams):
    """p_d gbar (g_u + 1) e^{-g_u} / (1 - e^{-g_u})."""
    arr = np.asarray(g_u, dtype=float)
    if np.any(arr <= 0.0) or np.isnan(arr).any():
        raise ValueError("ip_ul_power requires g_u > 0")
    out = params.p_d * params.gbar * (arr + 1.0) * np.exp(-arr) / (-np.expm1(-arr))
    return float(out) if arr.ndim == 0 else out


def pi_ul_power(g_l, params: SystemParams):
    """p_d gbar (e^{g_l} - g_l - 1)."""
    arr = np.asarray(g_l, dtype=float)
    if np.any(arr < 0.0) or np.isnan(arr).any():
        raise ValueError("pi_ul_power requires g_l >= 0")
    out = params.p_d * params.gbar * (np.expm1(arr) - arr)
    return float(out) if arr.ndim == 0 else out


def pip_ul_power(g_l, g_u, params: SystemParams):
    """p_d gbar (1 - (g_l+1) e^{-g_l} + (g_u+1) e^{-g_u}) / (e^{-g_l} - e^{-g_u})."""
    gl = np.asarray(g_l, dtype=float)
    gu = np.asarray(g_u, dtype=float)
    if np.any(gl < 0.0) or np.isnan(gl).any() or np.isnan(gu).any():
        raise ValueError("pip_ul_power requires g_l >= 0")
    if np.any(gu <= gl):
        raise ValueError("pip_ul_power requires g_l < g_u (zero transmit probability otherwise)")
    numer = 1.0 - (gl + 1.0) * np.exp(-gl) + (gu + 1.0) * np.exp(-gu)
    denom = -np.exp(-gl) * np.expm1(-(gu - gl))
    out = params.p_d * params.gbar * numer / denom
    scalar = gl.ndim == 0 and gu.ndim == 0
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Threshold schemes: ergodic throughput
# ---------------------------------------------------------------------------

def _rate_mass(gammabar, bound):
    """e^{-b} (ln(1 + gammabar b) + e^{b + 1/gammabar} E1(1/gammabar + b)).

    Antiderivative piece of the rate integral: the throughput over [l, u) is
    (_rate_mass(l) - _rate_mass(u)) / ln 2, and the piece vanishes as the
    bound grows. Written with the scaled exponential integral so small
    gammabar (huge 1/gammabar) stays finite.
    """
    return np.exp(-bound) * (
        np.log1p(gammabar * bound) + exp_scaled_e1(1.0 / gammabar + bound)
    )


def _phat_throughput(gammabar, lo, hi):
    """Closed-form integral of log2(1 + gammabar g) e^{-g} over [lo, hi)."""
    gb = np.asarray(gammabar, dtype=float)
    if not np.all(np.isfinite(gb)):
        raise ValueError("uplink SNR overflowed; thresholds leave no usable transmit set")
    # Below ~1e-280 the throughput is zero to hundreds of digits and
    # 1/gammabar would lose the scaled-E1 argument to overflow.
    zero = gb <= 1e-280
    safe = np.where(zero, 1.0, gb)
    hi_mass = 0.0 if np.ndim(hi) == 0 and np.isinf(hi) else _rate_mass(safe, hi)
    val = (_rate_mass(safe, lo) - hi_mass) / LN2
    return np.where(zero, 0.0, val)


def ip_throughput(g_u, params: SystemParams):
    """Ergodic bits/frame when transmitting below g_u and harvesting above."""
    gu = np.asarray(g_u, dtype=float)
    gb = ip_ul_power(gu, params) * params.gbar / params.sigma2
    out = _phat_throughput(gb, 0.0, gu)
    return float(out) if gu.ndim == 0 else out


def pi_throughput(g_l, params: SystemParams):
    """Ergodic bits/frame when harvesting below g_l and transmitting above.

    Zero at g_l = 0 (nothing harvested, zero uplink SNR) by continuity.
    """
    gl = np.asarray(g_l, dtype=float)
    gb = pi_ul_power(gl, params) * params.gbar / params.sigma2
    out = _phat_throughput(gb, gl, np.inf)
    return float(out) if gl.ndim == 0 else out


def pip_throughput(g_l, g_u, params: SystemParams):
    """Ergodic bits/frame transmitting on the middle band [g_l, g_u).

    Reduces exactly to the two-interval forms: g_l = 0 recovers the IP
    scheme and g_u -> inf recovers the PI scheme.
    """
    gl = np.asarray(g_l, dtype=float)
    gu = np.asarray(g_u, dtype=float)
    gb = pip_ul_power(gl, gu, params) * params.gbar / params.sigma2
    out = _phat_throughput(gb, gl, gu)
    scalar = gl.ndim == 0 and gu.ndim == 0
    return float(out) if scalar else out


def quad_throughput_oracle(partition: Partition, ul_power: float,
                           params: SystemParams) -> float:
    """Ground truth: direct quadrature of the rate integral over the wit set."""
    if ul_power < 0.0:
        raise ValueError("ul_power must be >= 0")
    if ul_power == 0.0:
        return 0.0
    gammabar = ul_power * params.gbar / params.sigma2
    total = 0.0
    for iv in partition.wit:
        if iv.empty:
            continue
        total += integrate(
            lambda g: np.log1p(gammabar * g) / LN2 * math.exp(-g), iv.lo, iv.hi
        )
    return total


def evaluate_policy(policy: Policy, params: SystemParams) -> SchemeEvaluation:
    """Closed-form evaluation of any policy (quadrature averaging for HTT)."""
    if isinstance(policy, HTTPolicy):
        return htt_ergodic_throughput(params)
    if isinstance(policy, IPPolicy):
        pu = ip_ul_power(policy.g_u, params)
        tp = ip_throughput(policy.g_u, params)
    elif isinstance(policy, PIPolicy):
        pu = pi_ul_power(policy.g_l, params)
        tp = pi_throughput(policy.g_l, params)
    elif isinstance(policy, PIPPolicy):
        pu = pip_ul_power(policy.g_l, policy.g_u, params)
        tp = pip_throughput(policy.g_l, policy.g_u, params)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return SchemeEvaluation(
        throughput_bits=float(tp),
        ul_power=float(pu),
        expected_ul_snr_gammabar=float(pu) * params.gbar / params.sigma2,
    )


# ---------------------------------------------------------------------------
# High-SNR asymptotes (used for the convexity checks and solver sanity)
# ---------------------------------------------------------------------------

def ip_asymptotic_throughput(g_u, params: SystemParams):
    """Infinite-downlink-power limit log2(dl_snr (g_u+1)e^{-g_u}/(1-e^{-g_u})) (1-e^{-g_u})."""
    gu = np.asarray(g_u, dtype=float)
    if np.any(gu <= 0.0) or np.isnan(gu).any():
        raise ValueError("ip_asymptotic_throughput requires g_u > 0")
    mass = -np.expm1(-gu)
    ratio = (gu + 1.0) * np.exp(-gu) / mass
    out = np.log2(params.dl_snr * ratio) * mass
    return float(out) if gu.ndim == 0 else out


def pi_asymptotic_throughput(g_l, params: SystemParams):
    """Infinite-downlink-power limit log2(p_d gbar/sigma2 (e^{g_l}-g_l-1)) e^{-g_l}."""
    gl = np.asarray(g_l, dtype=float)
    if np.any(gl <= 0.0) or np.isnan(gl).any():
        raise ValueError("pi_asymptotic_throughput requires g_l > 0")
    scale = params.p_d * params.gbar / params.sigma2
    out = np.log2(scale * (np.expm1(gl) - gl)) * np.exp(-gl)
    return float(out) if gl.ndim == 0 else out
