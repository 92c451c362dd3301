"""STDP learning rules, spike pairing, bounded weight updates, lateral kernel.

The symmetric rule (default) potentiates near-coincident pre/post spikes
and depresses distal ones inside a hard window; the asymmetric variant
splits on the sign of dt = t_post - t_pre. Printed forms of these rules
sometimes carry a growing exponential; the decaying form is the default
here and the growing one stays selectable for fidelity experiments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, ContractError

PAIRING_SCHEMES = ("nearest", "all-to-all")
EXPONENT_SIGNS = ("decay", "growing")
RULES = ("symmetric", "asymmetric")


@dataclass(frozen=True)
class StdpConfig:
    rule: str = "symmetric"
    s: float = 0.05          # learning magnitude (peak change at dt = 0)
    tau1: float = 20.0       # ms, zero crossing of the symmetric rule
    tau2: float = 18.0       # ms, exponential scale of the symmetric rule
    s_a: float = 0.05        # asymmetric depression magnitude
    s_b: float = 0.05        # asymmetric potentiation magnitude
    tau_a: float = 20.0      # ms
    tau_b: float = 20.0      # ms
    window: float = 30.0     # ms, hard pairing cutoff
    exponent_sign: str = "decay"

    def __post_init__(self) -> None:
        if self.rule not in RULES:
            raise ConfigError(f"rule must be one of {RULES}, got {self.rule!r}")
        if self.exponent_sign not in EXPONENT_SIGNS:
            raise ConfigError(
                f"exponent_sign must be one of {EXPONENT_SIGNS}, got {self.exponent_sign!r}"
            )
        if not self.window > 0:
            raise ConfigError(f"window must be > 0, got {self.window}")
        for name in ("tau1", "tau2", "tau_a", "tau_b"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("s", "s_a", "s_b"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class PlasticSynapse:
    """Signed sensory-to-motor weight, clamped to [c_i, c_e] after every update."""

    pre: tuple[int, int]     # (bundle id, neuron index)
    post: tuple[int, int]
    weight: float
    bounds: tuple[float, float]  # (c_i, c_e)

    def __post_init__(self) -> None:
        c_i, c_e = self.bounds
        if not c_i <= self.weight <= c_e:
            raise ConfigError(
                f"weight {self.weight} outside bounds [{c_i}, {c_e}]"
            )


def stdp_symmetric(dt_spike: float, cfg: StdpConfig) -> float:
    """Symmetric weight change for a spike-time difference (ms).

    S * (1 - (dt/tau1)^2) * exp(-|dt|/tau2) under the default decaying
    exponent: positive inside |dt| < tau1, negative out to the window,
    zero beyond it. Even in dt.
    """
    adt = abs(dt_spike)
    if adt > cfg.window:
        return 0.0
    shape = 1.0 - (dt_spike / cfg.tau1) ** 2
    arg = adt / cfg.tau2 if cfg.exponent_sign == "growing" else -adt / cfg.tau2
    return cfg.s * shape * math.exp(arg)


def stdp_asymmetric(dt_spike: float, cfg: StdpConfig) -> float:
    """Asymmetric weight change: depression for dt <= 0, potentiation for dt > 0.

    Both branches decay away from coincidence and cut off beyond the window.
    """
    adt = abs(dt_spike)
    if adt > cfg.window:
        return 0.0
    if dt_spike <= 0:
        return -cfg.s_a * math.exp(-adt / cfg.tau_a)
    return cfg.s_b * math.exp(-dt_spike / cfg.tau_b)


def stdp_delta(dt_spike: float, cfg: StdpConfig) -> float:
    """Dispatch on ``cfg.rule``."""
    if cfg.rule == "symmetric":
        return stdp_symmetric(dt_spike, cfg)
    return stdp_asymmetric(dt_spike, cfg)


def _check_sorted(times: np.ndarray, name: str) -> None:
    if times.size > 1 and (np.diff(times) < 0).any():
        raise ContractError(f"{name} spike times must be sorted ascending")


def pair_spikes(
    pre_times,
    post_times,
    window: float,
    scheme: str = "nearest",
) -> np.ndarray:
    """Pair pre/post spike trains; returns dt = t_post - t_pre per pair.

    ``all-to-all`` takes every pair strictly inside the window. ``nearest``
    pairs each post spike with its nearest pre spike and vice versa,
    deduplicated, bounding the update magnitude per spike. Ties go to the
    earlier spike.
    """
    if scheme not in PAIRING_SCHEMES:
        raise ConfigError(f"scheme must be one of {PAIRING_SCHEMES}, got {scheme!r}")
    pre = np.asarray(pre_times, dtype=float)
    post = np.asarray(post_times, dtype=float)
    _check_sorted(pre, "pre")
    _check_sorted(post, "post")
    if pre.size == 0 or post.size == 0:
        return np.empty(0, dtype=float)

    if scheme == "all-to-all":
        deltas = post[None, :] - pre[:, None]
        return deltas[np.abs(deltas) < window]

    pairs: set[tuple[int, int]] = set()
    for source, target, flip in ((post, pre, True), (pre, post, False)):
        idx = np.searchsorted(target, source)
        for i, t in enumerate(source):
            lo = idx[i] - 1
            hi = idx[i]
            best = None
            for j in (lo, hi):
                if 0 <= j < target.size:
                    d = abs(target[j] - t)
                    # tie -> earlier target spike (lower j wins, checked first)
                    if best is None or d < abs(target[best] - t):
                        best = j
            if best is None or abs(target[best] - t) >= window:
                continue
            pairs.add((best, i) if flip else (i, best))
    ordered = sorted(pairs)
    return np.array([post[j] - pre[i] for i, j in ordered], dtype=float)


def apply_update(syn: PlasticSynapse, delta: float) -> PlasticSynapse:
    """Bounded weight update: weight <- clamp(weight + delta, c_i, c_e)."""
    c_i, c_e = syn.bounds
    return replace(syn, weight=min(max(syn.weight + delta, c_i), c_e))


def lateral_weight(k: int, j: int, sigma_n: float, n_l: int) -> float:
    """Fixed inhibitory strength between neurons k and j of one bundle.

    exp(-(k-j)^2 / (sigma_n * n_l)^2) - 1: zero for k = j, approaching -1
    with distance, so far-away competitors are suppressed hardest while
    neighbours keep the output continuous.
    """
    if not 0 <= k < n_l or not 0 <= j < n_l:
        raise ContractError(f"indices must lie in [0, {n_l}), got k={k}, j={j}")
    if not sigma_n > 0:
        raise ConfigError(f"sigma_n must be > 0, got {sigma_n}")
    delta = k - j
    return math.exp(-(delta * delta) / (sigma_n * n_l) ** 2) - 1.0


def lateral_kernel(n_l: int, sigma_n: float) -> np.ndarray:
    """(n_l, n_l) matrix of lateral weights; the diagonal is zero."""
    idx = np.arange(n_l)
    delta = idx[:, None] - idx[None, :]
    return np.exp(-(delta * delta) / (sigma_n * n_l) ** 2) - 1.0
