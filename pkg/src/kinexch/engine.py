"""Monte Carlo driver for the exchange models.

One Monte Carlo step is N pairwise exchange attempts.  A run executes a
burn-in phase, then samples every ``sample_interval`` steps, accumulating
histograms, capped raw samples and per-ensemble moment sums.  Ensembles are
independent realizations (fresh quenched propensities, fresh initial
condition) driven by sub-streams spawned from the master seed by index, so
results are bit-identical for any worker count; merging is done in ensemble
index order.

The inner trade loops are numba-compiled and draw their randomness from a
per-ensemble xoshiro256++ stream seeded via numpy SeedSequence; setup and
measurement randomness come from numpy PCG64 streams.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
from numba import njit

from . import analysis, lambda_dist
from .errors import ConfigError, SimulationError
from .lambda_dist import LambdaDistSpec

__all__ = [
    "SimConfig",
    "SimResult",
    "RichestResult",
    "run",
    "select_pair",
    "detect_burn_in",
    "track_richest",
    "save_result",
]

MODELS = (
    "no_savings",
    "uniform_savings",
    "distributed_savings",
    "angle",
    "minimum_exchange",
    "commodity",
)

CONSERVATION_RTOL = 1e-9
LIVELOCK_FACTOR = 10_000


# --- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    model: str
    N: int
    mc_steps: int
    seed: int
    lambda_spec: Optional[LambdaDistSpec] = None
    money_per_agent: float = 1.0
    commodity_per_agent: float = 1.0
    theta: float = 0.0
    epsilon_mode: Union[str, float] = "random"
    burn_in: Union[int, str] = 0
    sample_interval: int = 10
    ensembles: int = 1
    angle_w: float = 0.5
    initial_condition: str = "uniform"
    max_samples: int = 4_000_000
    collect_pair_diffs: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.N < 2:
            raise ConfigError("N must be at least 2")
        if self.money_per_agent <= 0:
            raise ConfigError("money_per_agent must be positive")
        if self.model == "commodity" and self.commodity_per_agent <= 0:
            raise ConfigError("commodity_per_agent must be positive")
        if not 0.0 <= self.theta < 1.0:
            raise ConfigError("theta must be in [0, 1)")
        if isinstance(self.epsilon_mode, str):
            if self.epsilon_mode != "random":
                raise ConfigError("epsilon_mode must be 'random' or a fixed value")
        elif not 0.0 <= float(self.epsilon_mode) <= 1.0:
            raise ConfigError("fixed epsilon must lie in [0, 1]")
        if self.mc_steps < 1:
            raise ConfigError("mc_steps must be positive")
        if isinstance(self.burn_in, str):
            if self.burn_in != "auto":
                raise ConfigError("burn_in must be an integer or 'auto'")
        elif self.burn_in < 0:
            raise ConfigError("burn_in must be non-negative")
        if self.sample_interval < 1:
            raise ConfigError("sample_interval must be positive")
        if self.ensembles < 1:
            raise ConfigError("ensembles must be positive")
        if not 0.0 < self.angle_w < 1.0:
            raise ConfigError("angle_w must be in (0, 1)")
        if self.initial_condition not in ("uniform", "random"):
            raise ConfigError("initial_condition must be 'uniform' or 'random'")
        if self.model == "uniform_savings":
            if self.lambda_spec is None or self.lambda_spec.kind != "fixed":
                raise ConfigError("uniform_savings needs a fixed lambda spec")
        if self.model == "distributed_savings" and self.lambda_spec is None:
            raise ConfigError("distributed_savings needs a lambda spec")
        if self.model == "commodity" and self.lambda_spec is not None:
            if self.lambda_spec.kind == "annealed_lower_bound":
                raise ConfigError("annealed propensities are not supported in the commodity market")

    @property
    def total_money(self) -> float:
        return self.N * self.money_per_agent

    @property
    def total_commodity(self) -> float:
        return self.N * self.commodity_per_agent

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out["lambda_spec"] = self.lambda_spec.to_json() if self.lambda_spec else None
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SimConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(obj)
        if kw.get("lambda_spec") is not None:
            kw["lambda_spec"] = LambdaDistSpec.from_json(kw["lambda_spec"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


# --- results -----------------------------------------------------------------

LOG_EDGES = analysis.log_edges(1e-8, 1e6)


def _linear_edges(scale: float) -> np.ndarray:
    return np.linspace(0.0, 20.0 * scale, 801)


@dataclass
class SimResult:
    """Merged measurement accumulators of one run."""

    config: SimConfig
    seed: int
    money_log_counts: np.ndarray
    money_lin_counts: np.ndarray
    money_samples: np.ndarray
    lambda_samples: np.ndarray
    diff_samples: np.ndarray
    moment_sums: np.ndarray  # (ensembles, 4)
    moment_counts: np.ndarray  # (ensembles,)
    final_snapshots: List[np.ndarray]
    max_share: np.ndarray  # per ensemble, max over ticks of max_i m_i / M
    conservation_max_rel: float
    n_ticks: int
    rejected_trades: int = 0
    total_trades: int = 0
    commodity_log_counts: Optional[np.ndarray] = None
    commodity_lin_counts: Optional[np.ndarray] = None
    wealth_log_counts: Optional[np.ndarray] = None
    wealth_lin_counts: Optional[np.ndarray] = None
    commodity_samples: Optional[np.ndarray] = None
    wealth_samples: Optional[np.ndarray] = None
    money_underflow: int = 0
    wall_time: float = 0.0

    def _estimate(self, counts, edges, binning) -> analysis.DistributionEstimate:
        counts = counts.astype(np.int64)
        inside = int(counts.sum())
        widths = np.diff(edges)
        dens = counts / (inside * widths) if inside else np.zeros_like(widths)
        nz = counts > 0
        lo = edges[:-1][nz][0] if nz.any() else edges[0]
        hi = edges[1:][nz][-1] if nz.any() else edges[-1]
        return analysis.DistributionEstimate(
            binning=binning,
            edges=edges.copy(),
            density=dens,
            counts=counts,
            total_count=inside,
            support=(float(lo), float(hi)),
        )

    def money_estimate(self, binning="logarithmic"):
        if binning == "logarithmic":
            return self._estimate(self.money_log_counts, LOG_EDGES, binning)
        return self._estimate(
            self.money_lin_counts, _linear_edges(self.config.money_per_agent), binning
        )

    def commodity_estimate(self, binning="logarithmic"):
        if self.commodity_log_counts is None:
            raise ConfigError("no commodity data in this run")
        if binning == "logarithmic":
            return self._estimate(self.commodity_log_counts, LOG_EDGES, binning)
        return self._estimate(
            self.commodity_lin_counts,
            _linear_edges(self.config.commodity_per_agent),
            binning,
        )

    def wealth_estimate(self, binning="logarithmic"):
        if self.wealth_log_counts is None:
            raise ConfigError("no wealth data in this run")
        if binning == "logarithmic":
            return self._estimate(self.wealth_log_counts, LOG_EDGES, binning)
        scale = self.config.money_per_agent + self.config.commodity_per_agent
        return self._estimate(self.wealth_lin_counts, _linear_edges(scale), binning)

    def ensemble_moments(self):
        """Per-ensemble raw moments <m**k>, k = 1..4 (rows: ensembles)."""
        return self.moment_sums / self.moment_counts[:, None]

    def manifest(self) -> dict:
        return {
            "config": self.config.to_json(),
            "seed": self.seed,
            "n_ticks": self.n_ticks,
            "samples_kept": int(self.money_samples.size),
            "conservation_max_rel": self.conservation_max_rel,
            "rejected_trades": int(self.rejected_trades),
            "total_trades": int(self.total_trades),
            "wall_time_s": self.wall_time,
        }


@dataclass
class RichestResult:
    """Trajectory of the highest-propensity agent's money."""

    lambda_max: float
    series: np.ndarray  # ensemble-averaged money per MC step
    mean_money: float  # long-run mean of the series
    tau: float  # first step within 10% of the long-run mean

    def to_json(self) -> dict:
        return {
            "lambda_max": self.lambda_max,
            "mean_money": self.mean_money,
            "tau": self.tau,
        }


# --- in-loop random stream ------------------------------------------------------
#
# The per-trade randomness (pair indices, sharing fraction, price sign,
# annealed propensities) comes from a xoshiro256++ stream that lives inside
# the compiled loops; each ensemble owns one stream seeded from the master
# SeedSequence by index, so results do not depend on worker count or chunk
# boundaries.

_U64_1 = np.uint64(1)
_INV_2_53 = 1.1102230246251565e-16  # 2**-53


@njit(cache=True, nogil=True, inline="always")
def _rotl(x, k):
    return np.uint64((x << k) | (x >> (np.uint64(64) - k)))


@njit(cache=True, nogil=True, inline="always")
def _next_u64(s):
    out = _rotl(s[0] + s[3], np.uint64(23)) + s[0]
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], np.uint64(45))
    return out


@njit(cache=True, nogil=True, inline="always")
def _next_unit(s):
    return float(_next_u64(s) >> np.uint64(11)) * _INV_2_53


@njit(cache=True, nogil=True, inline="always")
def _next_index(s, n):
    v = int(_next_unit(s) * n)
    if v >= n:  # guards the measure-zero u == 1.0 rounding edge
        v = n - 1
    return v


@njit(cache=True, nogil=True, inline="always")
def _next_pair(s, n):
    i = _next_index(s, n)
    j = (i + 1 + _next_index(s, n - 1)) % n
    return i, j


def _make_state(seed_seq: np.random.SeedSequence) -> np.ndarray:
    state = seed_seq.generate_state(4, dtype=np.uint64)
    if not state.any():
        state[0] = np.uint64(0x9E3779B97F4A7C15)
    return state


# --- jitted trade loops --------------------------------------------------------

@njit(cache=True, nogil=True)
def _loop_savings(m, lam, n_trades, state, eps_fixed):
    n = m.size
    for _ in range(n_trades):
        i, j = _next_pair(state, n)
        e = _next_unit(state) if eps_fixed < 0.0 else eps_fixed
        pool = (1.0 - lam[i]) * m[i] + (1.0 - lam[j]) * m[j]
        m[i] = lam[i] * m[i] + e * pool
        m[j] = lam[j] * m[j] + (1.0 - e) * pool


@njit(cache=True, nogil=True)
def _loop_annealed(m, mu, n_trades, state, eps_fixed, lam_cap):
    n = m.size
    for _ in range(n_trades):
        i, j = _next_pair(state, n)
        e = _next_unit(state) if eps_fixed < 0.0 else eps_fixed
        li = min(mu[i] + _next_unit(state) * (1.0 - mu[i]), lam_cap)
        lj = min(mu[j] + _next_unit(state) * (1.0 - mu[j]), lam_cap)
        pool = (1.0 - li) * m[i] + (1.0 - lj) * m[j]
        m[i] = li * m[i] + e * pool
        m[j] = lj * m[j] + (1.0 - e) * pool


@njit(cache=True, nogil=True)
def _loop_angle(m, w, n_trades, state):
    n = m.size
    for _ in range(n_trades):
        i, j = _next_pair(state, n)
        if _next_unit(state) < 0.5:
            take = w * m[j]
            m[i] += take
            m[j] -= take
        else:
            take = w * m[i]
            m[i] -= take
            m[j] += take


@njit(cache=True, nogil=True)
def _loop_minexchange(m, n_trades, state, eps_fixed):
    n = m.size
    for _ in range(n_trades):
        i, j = _next_pair(state, n)
        e = _next_unit(state) if eps_fixed < 0.0 else eps_fixed
        stake = min(m[i], m[j])
        pool = 2.0 * stake
        m[i] = (m[i] - stake) + e * pool
        m[j] = (m[j] - stake) + (1.0 - e) * pool


@njit(cache=True, nogil=True)
def _loop_commodity(m, c, lam, n_trades, state, eps_fixed, theta, consec_limit, consec_in):
    n = m.size
    rejected = 0
    consec = consec_in
    for t in range(n_trades):
        i, j = _next_pair(state, n)
        e = _next_unit(state) if eps_fixed < 0.0 else eps_fixed
        p = 1.0 + theta if _next_unit(state) < 0.5 else 1.0 - theta
        pool = (1.0 - lam[i]) * m[i] + (1.0 - lam[j]) * m[j]
        mi = lam[i] * m[i] + e * pool
        mj = lam[j] * m[j] + (1.0 - e) * pool
        ci = c[i] - (mi - m[i]) / p
        cj = c[j] - (mj - m[j]) / p
        if mi < 0.0 or mj < 0.0 or ci < 0.0 or cj < 0.0:
            rejected += 1
            consec += 1
            if consec > consec_limit:
                return rejected, consec, t + 1
        else:
            consec = 0
            m[i] = mi
            m[j] = mj
            c[i] = ci
            c[j] = cj
    return rejected, consec, n_trades


@njit(cache=True, nogil=True)
def _loop_savings_record(m, lam, steps, state, eps_fixed, rich, out, offset):
    n = m.size
    for s in range(steps):
        for _ in range(n):
            i, j = _next_pair(state, n)
            e = _next_unit(state) if eps_fixed < 0.0 else eps_fixed
            pool = (1.0 - lam[i]) * m[i] + (1.0 - lam[j]) * m[j]
            m[i] = lam[i] * m[i] + e * pool
            m[j] = lam[j] * m[j] + (1.0 - e) * pool
        out[offset + s] = m[rich]


# --- helpers -------------------------------------------------------------------

def select_pair(N: int, rng: np.random.Generator):
    """Uniformly random unordered pair of distinct agent indices."""
    if N < 2:
        raise ConfigError("N must be at least 2")
    i = int(rng.integers(0, N))
    j = int((i + 1 + rng.integers(0, N - 1)) % N)
    return i, j


def _eps_fixed(cfg) -> float:
    """Fixed sharing fraction, or -1.0 when it is drawn fresh per trade."""
    return -1.0 if cfg.epsilon_mode == "random" else float(cfg.epsilon_mode)


def _initial_money(cfg, rng):
    if cfg.initial_condition == "uniform":
        return np.full(cfg.N, cfg.money_per_agent)
    parts = rng.random(cfg.N)
    return parts * (cfg.total_money / parts.sum())


class _Dynamics:
    """Advances one realization by an arbitrary number of trades."""

    def __init__(self, cfg: SimConfig, rng: np.random.Generator, state: np.ndarray):
        self.cfg = cfg
        self.rng = rng
        self.state = state
        self.eps_fixed = _eps_fixed(cfg)
        self.m = _initial_money(cfg, rng)
        self.c = None
        self.lam = None
        self.mu = None
        self.annealed = False
        self.rejected = 0
        self.consec_rejected = 0
        model = cfg.model
        if model in ("no_savings", "minimum_exchange", "angle"):
            self.lam = np.zeros(cfg.N)
        elif model == "uniform_savings":
            self.lam = np.full(cfg.N, cfg.lambda_spec.value)
        elif model in ("distributed_savings", "commodity"):
            spec = cfg.lambda_spec
            if spec is None:
                self.lam = np.zeros(cfg.N)
            elif spec.kind == "annealed_lower_bound":
                self.annealed = True
                self.mu = lambda_dist.sample_quenched(spec.zeta, cfg.N, rng)
                self.lam = np.zeros(cfg.N)
            else:
                self.lam = lambda_dist.sample_quenched(spec, cfg.N, rng)
        if model == "commodity":
            self.c = np.full(cfg.N, cfg.commodity_per_agent)

    def advance(self, n_trades: int):
        cfg = self.cfg
        model = cfg.model
        if model == "commodity":
            rej, consec, processed = _loop_commodity(
                self.m, self.c, self.lam, n_trades, self.state, self.eps_fixed,
                cfg.theta, LIVELOCK_FACTOR * cfg.N, self.consec_rejected,
            )
            self.rejected += rej
            self.consec_rejected = consec
            if processed < n_trades:
                raise SimulationError(
                    f"commodity livelock: {consec} consecutive rejections"
                )
        elif model == "angle":
            _loop_angle(self.m, cfg.angle_w, n_trades, self.state)
        elif model == "minimum_exchange":
            _loop_minexchange(self.m, n_trades, self.state, self.eps_fixed)
        elif self.annealed:
            _loop_annealed(
                self.m, self.mu, n_trades, self.state, self.eps_fixed,
                lambda_dist.LAMBDA_MAX,
            )
        else:
            _loop_savings(self.m, self.lam, n_trades, self.state, self.eps_fixed)

    def check_conservation(self) -> float:
        cfg = self.cfg
        rel = abs(float(self.m.sum()) - cfg.total_money) / cfg.total_money
        if self.c is not None:
            rel_c = abs(float(self.c.sum()) - cfg.total_commodity) / cfg.total_commodity
            rel = max(rel, rel_c)
        if rel > CONSERVATION_RTOL:
            raise SimulationError(
                f"conservation breach: relative deviation {rel:.3e} "
                f"(money sum {self.m.sum()!r}, expected {self.cfg.total_money!r})"
            )
        return rel


# --- burn-in detection -----------------------------------------------------------

def detect_burn_in(
    config: SimConfig,
    window: Optional[int] = None,
    threshold: float = 0.08,
    consecutive: int = 3,
    max_steps: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    dyn: Optional[_Dynamics] = None,
) -> int:
    """First MC step at which the money histogram has stopped drifting.

    The money distribution is histogrammed over successive windows of MC
    steps; when the L1 distance between consecutive windowed histograms
    stays below ``threshold`` plus the statistical noise floor of the
    histograms themselves for ``consecutive`` windows, the start of that
    stable stretch is returned.  The noise floor matters for small
    populations, where even a perfectly stationary chain never drops below
    it.  Raises if no convergence within the budget.

    The criterion tracks the bulk of the distribution.  Quenched high-
    propensity agents equilibrate on much longer timescales (~1/(1-lam)
    MC steps), so tail-sensitive measurements should use an explicit,
    longer burn-in rather than the auto-detected one.
    """
    if dyn is None:
        ss = np.random.SeedSequence(config.seed)
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(ss.spawn(1)[0]))
        dyn = _Dynamics(config, rng, _make_state(ss))
    if window is None:
        window = max(50, config.N // 4)
    budget = max_steps if max_steps is not None else max(config.mc_steps, 10 ** 6)
    edges = LOG_EDGES
    snaps_per_window = 8
    sub = max(1, window // snaps_per_window)
    prev = None
    stable = 0
    step = 0
    first_stable = 0
    while step < budget:
        counts = np.zeros(edges.size - 1, dtype=np.int64)
        s = 0
        while s < window:
            k = min(sub, window - s)
            dyn.advance(k * config.N)
            counts += np.histogram(dyn.m, bins=edges)[0]
            s += k
        step += window
        total = counts.sum()
        hist = counts / total
        # expected L1 distance between two noise-only histograms of this
        # size (E|N(0, sigma)| per bin, doubled for residual correlation
        # between snapshots of the same agents)
        noise = 2.0 * float(np.sqrt(4.0 * hist * (1.0 - hist) / (np.pi * total)).sum())
        if prev is not None:
            l1 = float(np.abs(hist - prev).sum())
            if l1 < threshold + noise:
                if stable == 0:
                    first_stable = step - window
                stable += 1
                if stable >= consecutive:
                    return max(first_stable, window)
            else:
                stable = 0
        prev = hist
    raise SimulationError(
        f"burn-in did not converge within {budget} MC steps "
        f"(last window count {stable})"
    )


# --- main run ---------------------------------------------------------------------

@dataclass
class _EnsembleOut:
    money_log: np.ndarray
    money_lin: np.ndarray
    money_samples: np.ndarray
    lambda_samples: np.ndarray
    diff_samples: np.ndarray
    moment_sums: np.ndarray
    moment_count: int
    final_snapshot: np.ndarray
    max_share: float
    cons_max: float
    rejected: int
    trades: int
    underflow: int
    commodity_log: Optional[np.ndarray] = None
    commodity_lin: Optional[np.ndarray] = None
    wealth_log: Optional[np.ndarray] = None
    wealth_lin: Optional[np.ndarray] = None
    commodity_samples: Optional[np.ndarray] = None
    wealth_samples: Optional[np.ndarray] = None


def _run_ensemble(cfg: SimConfig, ss: np.random.SeedSequence) -> _EnsembleOut:
    init_seed, meas_seed, state_seed = ss.spawn(3)
    rng = np.random.Generator(np.random.PCG64(init_seed))
    meas_rng = np.random.Generator(np.random.PCG64(meas_seed))
    dyn = _Dynamics(cfg, rng, _make_state(state_seed))

    if cfg.burn_in == "auto":
        burn = detect_burn_in(cfg, rng=rng, dyn=dyn)
    else:
        burn = int(cfg.burn_in)
        dyn.advance(burn * cfg.N)
    cons_max = dyn.check_conservation()

    n_ticks = max(1, cfg.mc_steps // cfg.sample_interval)
    cap = max(cfg.N, cfg.max_samples // cfg.ensembles)
    ticks_budget = max(1, cap // cfg.N)
    stride = max(1, math.ceil(n_ticks / ticks_budget))

    is_comm = cfg.model == "commodity"
    p0 = cfg.money_per_agent / cfg.commodity_per_agent if is_comm else 0.0
    lin_m_edges = _linear_edges(cfg.money_per_agent)
    money_log = np.zeros(LOG_EDGES.size - 1, dtype=np.int64)
    money_lin = np.zeros(lin_m_edges.size - 1, dtype=np.int64)
    underflow = 0
    if is_comm:
        lin_c_edges = _linear_edges(cfg.commodity_per_agent)
        lin_w_edges = _linear_edges(cfg.money_per_agent + cfg.commodity_per_agent)
        comm_log = np.zeros(LOG_EDGES.size - 1, dtype=np.int64)
        comm_lin = np.zeros(lin_c_edges.size - 1, dtype=np.int64)
        wlth_log = np.zeros(LOG_EDGES.size - 1, dtype=np.int64)
        wlth_lin = np.zeros(lin_w_edges.size - 1, dtype=np.int64)
        c_keep, w_keep = [], []
    m_keep, l_keep, d_keep = [], [], []
    moment_sums = np.zeros(4)
    moment_count = 0
    max_share = 0.0

    for tick in range(n_ticks):
        dyn.advance(cfg.sample_interval * cfg.N)
        cons_max = max(cons_max, dyn.check_conservation())
        m = dyn.m
        money_log += np.histogram(m, bins=LOG_EDGES)[0]
        money_lin += np.histogram(m, bins=lin_m_edges)[0]
        underflow += int(np.sum(m < LOG_EDGES[0]))
        for k in range(4):
            moment_sums[k] += float(np.sum(m ** (k + 1)))
        moment_count += m.size
        max_share = max(max_share, float(m.max()) / cfg.total_money)
        if is_comm:
            c = dyn.c
            w = m + p0 * c
            comm_log += np.histogram(c, bins=LOG_EDGES)[0]
            comm_lin += np.histogram(c, bins=lin_c_edges)[0]
            wlth_log += np.histogram(w, bins=LOG_EDGES)[0]
            wlth_lin += np.histogram(w, bins=lin_w_edges)[0]
        if tick % stride == stride - 1:
            m_keep.append(m.copy())
            l_keep.append((dyn.mu if dyn.annealed else dyn.lam).copy())
            if is_comm:
                c_keep.append(c.copy())
                w_keep.append(w.copy())
            if cfg.collect_pair_diffs:
                perm = meas_rng.permutation(cfg.N)
                half = cfg.N // 2
                d_keep.append(np.abs(m[perm[:half]] - m[perm[half : 2 * half]]))

    trades = (burn + n_ticks * cfg.sample_interval) * cfg.N
    out = _EnsembleOut(
        money_log=money_log,
        money_lin=money_lin,
        money_samples=np.concatenate(m_keep) if m_keep else np.empty(0),
        lambda_samples=np.concatenate(l_keep) if l_keep else np.empty(0),
        diff_samples=np.concatenate(d_keep) if d_keep else np.empty(0),
        moment_sums=moment_sums,
        moment_count=moment_count,
        final_snapshot=dyn.m.copy(),
        max_share=max_share,
        cons_max=cons_max,
        rejected=dyn.rejected,
        trades=trades,
        underflow=underflow,
    )
    if is_comm:
        out.commodity_log = comm_log
        out.commodity_lin = comm_lin
        out.wealth_log = wlth_log
        out.wealth_lin = wlth_lin
        out.commodity_samples = np.concatenate(c_keep) if c_keep else np.empty(0)
        out.wealth_samples = np.concatenate(w_keep) if w_keep else np.empty(0)
    return out


def run(config: SimConfig, threads: int = 1) -> SimResult:
    """Execute the configured experiment and return merged measurements."""
    t0 = time.time()
    streams = np.random.SeedSequence(config.seed).spawn(config.ensembles)
    if threads > 1 and config.ensembles > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            outs = list(ex.map(lambda s: _run_ensemble(config, s), streams))
    else:
        outs = [_run_ensemble(config, s) for s in streams]

    is_comm = config.model == "commodity"
    res = SimResult(
        config=config,
        seed=config.seed,
        money_log_counts=sum(o.money_log for o in outs),
        money_lin_counts=sum(o.money_lin for o in outs),
        money_samples=np.concatenate([o.money_samples for o in outs]),
        lambda_samples=np.concatenate([o.lambda_samples for o in outs]),
        diff_samples=np.concatenate([o.diff_samples for o in outs]),
        moment_sums=np.stack([o.moment_sums for o in outs]),
        moment_counts=np.array([o.moment_count for o in outs]),
        final_snapshots=[o.final_snapshot for o in outs],
        max_share=np.array([o.max_share for o in outs]),
        conservation_max_rel=max(o.cons_max for o in outs),
        n_ticks=max(1, config.mc_steps // config.sample_interval),
        rejected_trades=sum(o.rejected for o in outs),
        total_trades=sum(o.trades for o in outs),
        money_underflow=sum(o.underflow for o in outs),
    )
    if is_comm:
        res.commodity_log_counts = sum(o.commodity_log for o in outs)
        res.commodity_lin_counts = sum(o.commodity_lin for o in outs)
        res.wealth_log_counts = sum(o.wealth_log for o in outs)
        res.wealth_lin_counts = sum(o.wealth_lin for o in outs)
        res.commodity_samples = np.concatenate([o.commodity_samples for o in outs])
        res.wealth_samples = np.concatenate([o.wealth_samples for o in outs])
    res.wall_time = time.time() - t0
    return res


# --- richest-agent tracking --------------------------------------------------------

def track_richest(
    config: SimConfig,
    lambda_max: Optional[float] = None,
    record_steps: Optional[int] = None,
    threads: int = 1,
) -> RichestResult:
    """Per-MC-step money of the highest-propensity agent, ensemble averaged.

    If ``lambda_max`` is given, agent 0 is pinned at that propensity and the
    rest are drawn from the spec conditioned below it; otherwise the natural
    maximum of the sampled propensities is tracked.  The relaxation time is
    the first step at which the averaged trajectory stays within 10% of its
    long-run mean (the mean over the final quarter of the record).
    """
    if config.model != "distributed_savings":
        raise ConfigError("richest-agent tracking needs the distributed model")
    steps = record_steps if record_steps is not None else config.mc_steps
    streams = np.random.SeedSequence(config.seed).spawn(config.ensembles)

    def one(ss):
        init_seed, state_seed = ss.spawn(2)
        rng = np.random.Generator(np.random.PCG64(init_seed))
        state = _make_state(state_seed)
        lam = lambda_dist.sample_quenched(config.lambda_spec, config.N, rng)
        if lambda_max is not None:
            bad = lam >= lambda_max
            while bad.any():
                lam[bad] = lambda_dist.sample_quenched(
                    config.lambda_spec, max(2, int(bad.sum())), rng
                )[: int(bad.sum())]
                bad = lam >= lambda_max
            lam[0] = lambda_max
            rich = 0
        else:
            rich = int(np.argmax(lam))
        m = _initial_money(config, rng)
        out = np.empty(steps)
        _loop_savings_record(m, lam, steps, state, _eps_fixed(config), rich, out, 0)
        return out, lam[rich]

    if threads > 1 and config.ensembles > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, streams))
    else:
        results = [one(s) for s in streams]
    series = np.mean([r[0] for r in results], axis=0)
    lam_max_actual = float(np.mean([r[1] for r in results]))
    long_run = float(series[-(max(1, steps // 4)) :].mean())
    within = np.abs(series - long_run) <= 0.10 * long_run
    tau = float(steps)
    # last entry of the leading excursion outside the 10% band
    outside = np.nonzero(~within)[0]
    if outside.size == 0:
        tau = 1.0
    elif outside[-1] < steps - 1:
        tau = float(outside[-1] + 1)
    return RichestResult(
        lambda_max=lam_max_actual, series=series, mean_money=long_run, tau=tau
    )


# --- output files --------------------------------------------------------------------

def save_result(result: SimResult, out_dir: str) -> dict:
    """Write histogram CSVs and the JSON manifest; returns the manifest."""
    os.makedirs(out_dir, exist_ok=True)
    files = {}

    def put(name, text):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        files[name] = hashlib.sha256(text.encode()).hexdigest()

    put("money_log.csv", result.money_estimate("logarithmic").to_csv())
    put("money_linear.csv", result.money_estimate("linear").to_csv())
    if result.commodity_log_counts is not None:
        put("commodity_log.csv", result.commodity_estimate("logarithmic").to_csv())
        put("commodity_linear.csv", result.commodity_estimate("linear").to_csv())
        put("wealth_log.csv", result.wealth_estimate("logarithmic").to_csv())
        put("wealth_linear.csv", result.wealth_estimate("linear").to_csv())
    manifest = result.manifest()
    manifest["files"] = files
    text = json.dumps(manifest, indent=2, sort_keys=True)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(text)
    return manifest
