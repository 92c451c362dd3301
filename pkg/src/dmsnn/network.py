"""The differential-map spiking network.

Layout: n + 2m bundles (m joint-angle and n spatial-velocity sensory
bundles, m joint-velocity motor bundles), every sensory neuron connected
to every motor neuron through a signed plastic weight, fixed lateral
inhibition inside each motor bundle. Training clamps encoded sensory and
teacher currents for one iteration window and applies STDP to the spike
trains; control injects sensory currents only and decodes motor commands
from spike counts with weights frozen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from .coding import Bundle, activation_to_current, decode, encode, encode_joint_2d, make_bundle
from .errors import ArchiveParseError, ConfigError, ContractError, NoActivityError, NumericDomainError
from .izhikevich import (
    FAST_SPIKING,
    MOTOR_INTEGRATOR,
    NeuronParams,
    rest_state,
    rheobase,
    step_arrays,
)
from .plasticity import PAIRING_SCHEMES, StdpConfig, lateral_kernel, pair_spikes, stdp_delta

ARCHIVE_FORMAT = "DMSNN-WEIGHTS v1"

# Training inputs may overshoot their configured range by this fraction
# of the span (babbling transients); beyond that the caller has a bug.
TRAINING_RANGE_SLACK = 0.2

Ranges = tuple[tuple[float, float], ...]


def _as_ranges(raw, count: int, name: str) -> Ranges:
    try:
        ranges = tuple((float(lo), float(hi)) for lo, hi in raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a sequence of (min, max) pairs") from exc
    if len(ranges) != count:
        raise ConfigError(f"{name} needs {count} pairs, got {len(ranges)}")
    for lo, hi in ranges:
        if not (math.isfinite(lo) and math.isfinite(hi)) or not hi > lo:
            raise ConfigError(f"{name} entries must satisfy max > min, got ({lo}, {hi})")
    return ranges


@dataclass(frozen=True)
class NetworkConfig:
    """Everything needed to build and run a network deterministically."""

    n: int                                   # task-space dimensions
    m: int                                   # joint-space dimensions
    theta_ranges: Ranges                     # per joint (m pairs)
    xdot_ranges: Ranges                      # per task dimension (n pairs)
    thetadot_ranges: Ranges                  # per joint (m pairs)
    n_l: int = 36
    sensory_params: NeuronParams = FAST_SPIKING
    motor_params: NeuronParams = MOTOR_INTEGRATOR
    stdp: StdpConfig = StdpConfig()
    pairing: str = "nearest"
    c_i: float = -4.0
    c_e: float = 4.0
    sigma_n: float = 0.2
    iteration_ms: float = 80.0
    decode_window_ms: float = 20.0
    gain: float = 1.5
    dt: float = 1.0
    seed: int = 0
    syn_scale: float = 2.0                   # plastic-weight -> current multiplier
    syn_tau_ms: float = 5.0                  # exponential current tail; 0 = one-step pulse
    inh_tau_ms: float = 5.0
    init_weight_scale: float = 0.05          # initial weights ~ U[0, scale * c_e]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.m < self.n:
            raise ConfigError(f"m must be >= n, got m={self.m}, n={self.n}")
        if self.n_l < 2:
            raise ConfigError(f"n_l must be >= 2, got {self.n_l}")
        if not self.iteration_ms >= self.decode_window_ms:
            raise ConfigError("iteration_ms must be >= decode_window_ms")
        if not 0.0 < self.dt <= 1.0:
            raise ConfigError(f"dt must lie in (0, 1] ms, got {self.dt}")
        for name in ("iteration_ms", "decode_window_ms"):
            steps = getattr(self, name) / self.dt
            if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
                raise ConfigError(f"{name} must be a positive multiple of dt")
        if not self.gain > 1.0:
            raise ConfigError(f"gain must be > 1, got {self.gain}")
        if not self.c_i < self.c_e or self.c_i > 0.0 or self.c_e < 0.0:
            raise ConfigError(f"weight bounds must satisfy c_i <= 0 <= c_e, got [{self.c_i}, {self.c_e}]")
        if not self.sigma_n > 0:
            raise ConfigError(f"sigma_n must be > 0, got {self.sigma_n}")
        if self.pairing not in PAIRING_SCHEMES:
            raise ConfigError(f"pairing must be one of {PAIRING_SCHEMES}, got {self.pairing!r}")
        if not self.syn_scale > 0:
            raise ConfigError(f"syn_scale must be > 0, got {self.syn_scale}")
        if self.syn_tau_ms < 0 or self.inh_tau_ms < 0:
            raise ConfigError("synaptic time constants must be >= 0")
        if not 0.0 <= self.init_weight_scale <= 1.0:
            raise ConfigError(f"init_weight_scale must lie in [0, 1], got {self.init_weight_scale}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        object.__setattr__(self, "theta_ranges", _as_ranges(self.theta_ranges, self.m, "theta_ranges"))
        object.__setattr__(self, "xdot_ranges", _as_ranges(self.xdot_ranges, self.n, "xdot_ranges"))
        object.__setattr__(
            self, "thetadot_ranges", _as_ranges(self.thetadot_ranges, self.m, "thetadot_ranges")
        )


@dataclass(frozen=True)
class SpikeRecord:
    time: float    # ms
    bundle: int    # global bundle index (sensory first, then motor)
    neuron: int


@dataclass(frozen=True)
class WeightDeltaSummary:
    """Aggregate of one training iteration's weight changes."""

    synapses_updated: int
    l1: float
    linf: float


def _stdp_sum(deltas: np.ndarray, cfg: StdpConfig) -> float:
    """Vectorized sum of stdp_delta over a batch of spike-time differences."""
    if deltas.size == 0:
        return 0.0
    adt = np.abs(deltas)
    inside = adt <= cfg.window
    if not inside.any():
        return 0.0
    d = deltas[inside]
    adt = adt[inside]
    if cfg.rule == "symmetric":
        sign = 1.0 if cfg.exponent_sign == "growing" else -1.0
        vals = cfg.s * (1.0 - (d / cfg.tau1) ** 2) * np.exp(sign * adt / cfg.tau2)
    else:
        vals = np.where(
            d <= 0,
            -cfg.s_a * np.exp(-adt / cfg.tau_a),
            cfg.s_b * np.exp(-d / cfg.tau_b),
        )
    return float(vals.sum())


class _SpikingEngine:
    """Vectorized state and stepping shared by the bundle network and the
    joint-encoding benchmark variant. Holds sensory/motor (v, u), synaptic
    traces, the plastic weight matrix and the fixed lateral kernel."""

    def __init__(self, n_sens: int, m: int, cfg: NetworkConfig, weights: np.ndarray):
        self.cfg = cfg
        self.n_sens = n_sens
        self.m = m
        self.n_mot = m * cfg.n_l
        if weights.shape != (n_sens, self.n_mot):
            raise ConfigError(f"weight matrix must be {(n_sens, self.n_mot)}, got {weights.shape}")
        self.weights = weights
        self.lateral = lateral_kernel(cfg.n_l, cfg.sigma_n)
        self.exc_decay = math.exp(-cfg.dt / cfg.syn_tau_ms) if cfg.syn_tau_ms > 0 else 0.0
        self.inh_decay = math.exp(-cfg.dt / cfg.inh_tau_ms) if cfg.inh_tau_ms > 0 else 0.0
        self.v_s = np.empty(n_sens)
        self.u_s = np.empty(n_sens)
        self.v_m = np.empty(self.n_mot)
        self.u_m = np.empty(self.n_mot)
        self.exc_trace = np.zeros(n_sens)
        self.inh_trace = np.zeros(self.n_mot)
        self.reset_state()

    def reset_state(self) -> None:
        rs = rest_state(self.cfg.sensory_params)
        rm = rest_state(self.cfg.motor_params)
        self.v_s.fill(rs.v)
        self.u_s.fill(rs.u)
        self.v_m.fill(rm.v)
        self.u_m.fill(rm.u)
        self.exc_trace.fill(0.0)
        self.inh_trace.fill(0.0)

    def run(
        self,
        i_sens: np.ndarray,
        i_mot_ext: np.ndarray,
        n_steps: int,
        collect_sens: bool,
    ) -> tuple[Optional[np.ndarray], np.ndarray]:
        """Advance ``n_steps``; returns boolean spike histories (steps x neurons)."""
        cfg = self.cfg
        W = self.weights
        lat_gain = abs(cfg.c_i)
        m, n_l = self.m, cfg.n_l
        sens_hist = np.zeros((n_steps, self.n_sens), dtype=bool) if collect_sens else None
        mot_hist = np.zeros((n_steps, self.n_mot), dtype=bool)
        exc_trace, inh_trace = self.exc_trace, self.inh_trace
        for k in range(n_steps):
            syn = cfg.syn_scale * (exc_trace @ W)
            syn += lat_gain * (inh_trace.reshape(m, n_l) @ self.lateral).ravel()
            fired_s = step_arrays(self.v_s, self.u_s, cfg.sensory_params, i_sens, cfg.dt)
            fired_m = step_arrays(self.v_m, self.u_m, cfg.motor_params, i_mot_ext + syn, cfg.dt)
            if self.exc_decay:
                exc_trace *= self.exc_decay
                exc_trace += fired_s
            else:
                exc_trace[:] = fired_s
            if self.inh_decay:
                inh_trace *= self.inh_decay
                inh_trace += fired_m
            else:
                inh_trace[:] = fired_m
            if collect_sens:
                sens_hist[k] = fired_s
            mot_hist[k] = fired_m
        return sens_hist, mot_hist

    def apply_stdp(self, sens_hist: np.ndarray, mot_hist: np.ndarray) -> WeightDeltaSummary:
        """Pair per-synapse spike trains of one window and apply the summed,
        clamped weight update. Spike times are relative to the window start."""
        cfg = self.cfg
        dt = cfg.dt
        pre_idx = np.nonzero(sens_hist.any(axis=0))[0]
        post_idx = np.nonzero(mot_hist.any(axis=0))[0]
        if pre_idx.size == 0 or post_idx.size == 0:
            return WeightDeltaSummary(0, 0.0, 0.0)
        post_times = [(np.nonzero(mot_hist[:, j])[0] + 1) * dt for j in post_idx]
        W = self.weights
        updated = 0
        l1 = 0.0
        linf = 0.0
        for i in pre_idx:
            pre_t = (np.nonzero(sens_hist[:, i])[0] + 1) * dt
            for j, post_t in zip(post_idx, post_times):
                deltas = pair_spikes(pre_t, post_t, cfg.stdp.window, cfg.pairing)
                if deltas.size == 0:
                    continue
                dw = _stdp_sum(deltas, cfg.stdp)
                if dw == 0.0:
                    continue
                old = W[i, j]
                W[i, j] = min(max(old + dw, cfg.c_i), cfg.c_e)
                change = W[i, j] - old
                if change != 0.0:
                    updated += 1
                    l1 += abs(change)
                    linf = max(linf, abs(change))
        return WeightDeltaSummary(updated, l1, linf)


class DmsnnNetwork:
    """Bundle network with plastic sensory-to-motor map and WTA motor bundles."""

    def __init__(self, config: NetworkConfig):
        self.config = config
        n, m, n_l = config.n, config.m, config.n_l
        self.sensory_bundles = [
            make_bundle(r, n_l, config.sensory_params)
            for r in (*config.theta_ranges, *config.xdot_ranges)
        ]
        self.motor_bundles = [
            make_bundle(r, n_l, config.motor_params) for r in config.thetadot_ranges
        ]
        self.rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        n_sens = (n + m) * n_l
        weights = self.rng.uniform(0.0, config.init_weight_scale * config.c_e, (n_sens, m * n_l))
        self.engine = _SpikingEngine(n_sens, m, config, weights)
        self._attach_bundle_views()
        self.clock = 0.0
        self.i_star_sensory = rheobase(config.sensory_params)
        self.i_star_motor = rheobase(config.motor_params)

    def _attach_bundle_views(self) -> None:
        # bundles expose views into the engine state so they can be inspected
        n_l = self.config.n_l
        for b_i, bundle in enumerate(self.sensory_bundles):
            bundle.v = self.engine.v_s[b_i * n_l : (b_i + 1) * n_l]
            bundle.u = self.engine.u_s[b_i * n_l : (b_i + 1) * n_l]
        for b_i, bundle in enumerate(self.motor_bundles):
            bundle.v = self.engine.v_m[b_i * n_l : (b_i + 1) * n_l]
            bundle.u = self.engine.u_m[b_i * n_l : (b_i + 1) * n_l]

    # -- introspection ----------------------------------------------------

    @property
    def weights(self) -> np.ndarray:
        """Plastic weight matrix, shape ((n+m)*n_l, m*n_l)."""
        return self.engine.weights

    @property
    def bundles(self) -> list[Bundle]:
        return [*self.sensory_bundles, *self.motor_bundles]

    def reset_dynamic_state(self) -> None:
        """Reset membrane state and synaptic traces; weights are untouched."""
        self.engine.reset_state()

    def clone(self) -> "DmsnnNetwork":
        """Independent copy: same config and weights, fresh dynamic state."""
        dup = DmsnnNetwork(self.config)
        dup.engine.weights[:] = self.engine.weights
        return dup

    # -- currents ----------------------------------------------------------

    def _check_inputs(self, vals, ranges, name: str, enforce_range: bool) -> np.ndarray:
        arr = np.asarray(vals, dtype=float).reshape(-1)
        if arr.shape != (len(ranges),):
            raise ContractError(f"{name} must have {len(ranges)} entries, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise NumericDomainError(f"{name} contains non-finite values: {arr}")
        if enforce_range:
            for val, (lo, hi) in zip(arr, ranges):
                slack = TRAINING_RANGE_SLACK * (hi - lo)
                if val < lo - slack or val > hi + slack:
                    raise ContractError(
                        f"{name} value {val} outside [{lo}, {hi}] by more than "
                        f"{TRAINING_RANGE_SLACK:.0%} of the span"
                    )
        return arr

    def _sensory_currents(self, theta: np.ndarray, xdot: np.ndarray) -> np.ndarray:
        vals = np.concatenate([theta, xdot])
        parts = [
            activation_to_current(encode(bundle, val), self.i_star_sensory, self.config.gain)
            for bundle, val in zip(self.sensory_bundles, vals)
        ]
        return np.concatenate(parts)

    def _teacher_currents(self, thetadot: np.ndarray) -> np.ndarray:
        parts = [
            activation_to_current(encode(bundle, val), self.i_star_motor, self.config.gain)
            for bundle, val in zip(self.motor_bundles, thetadot)
        ]
        return np.concatenate(parts)

    def _records(
        self, sens_hist: Optional[np.ndarray], mot_hist: np.ndarray, t0: float
    ) -> list[SpikeRecord]:
        n_l = self.config.n_l
        dt = self.config.dt
        rows: list[tuple[float, int, int]] = []
        if sens_hist is not None:
            ks, idx = np.nonzero(sens_hist)
            rows += [(t0 + (k + 1) * dt, i // n_l, i % n_l) for k, i in zip(ks.tolist(), idx.tolist())]
        off = self.config.n + self.config.m
        km, jdx = np.nonzero(mot_hist)
        rows += [(t0 + (k + 1) * dt, off + j // n_l, j % n_l) for k, j in zip(km.tolist(), jdx.tolist())]
        rows.sort()
        return [SpikeRecord(t, b, nn) for t, b, nn in rows]

    # -- training and control ----------------------------------------------

    def training_step(
        self, theta, xdot, thetadot_teacher
    ) -> tuple[list[SpikeRecord], WeightDeltaSummary]:
        """One clamped-stimulus iteration followed by the STDP update."""
        cfg = self.config
        theta = self._check_inputs(theta, cfg.theta_ranges, "theta", True)
        xdot = self._check_inputs(xdot, cfg.xdot_ranges, "xdot", True)
        teacher = self._check_inputs(thetadot_teacher, cfg.thetadot_ranges, "thetadot_teacher", True)
        i_sens = self._sensory_currents(theta, xdot)
        i_mot = self._teacher_currents(teacher)
        n_steps = int(round(cfg.iteration_ms / cfg.dt))
        sens_hist, mot_hist = self.engine.run(i_sens, i_mot, n_steps, collect_sens=True)
        summary = self.engine.apply_stdp(sens_hist, mot_hist)
        records = self._records(sens_hist, mot_hist, self.clock)
        self.clock += cfg.iteration_ms
        return records, summary

    def control_step(self, theta, v_d) -> np.ndarray:
        """Decode a joint-velocity command for the desired spatial velocity.

        Sensory currents run for one decode window with plastic weights
        frozen; each motor bundle's command is the center vote over its
        spike counts, or 0 (hold) if the bundle stayed silent.
        """
        cfg = self.config
        theta = self._check_inputs(theta, cfg.theta_ranges, "theta", False)
        v_d = self._check_inputs(v_d, cfg.xdot_ranges, "v_d", False)
        i_sens = self._sensory_currents(theta, v_d)
        n_steps = int(round(cfg.decode_window_ms / cfg.dt))
        _, mot_hist = self.engine.run(
            i_sens, np.zeros(self.engine.n_mot), n_steps, collect_sens=False
        )
        counts = mot_hist.sum(axis=0)
        n_l = cfg.n_l
        cmd = np.empty(cfg.m)
        for b_i, bundle in enumerate(self.motor_bundles):
            c = counts[b_i * n_l : (b_i + 1) * n_l]
            try:
                cmd[b_i] = decode(bundle, c.astype(float))
            except NoActivityError:
                cmd[b_i] = 0.0
        self.clock += cfg.decode_window_ms
        return cmd


def build(config: NetworkConfig) -> DmsnnNetwork:
    """Construct a network from a validated configuration."""
    return DmsnnNetwork(config)


# -- training orchestration ----------------------------------------------


def train_on_samples(
    net: DmsnnNetwork,
    samples: Iterable[tuple],
    iterations: int,
    checkpoint_iters: Iterable[int] = (),
    on_checkpoint: Optional[Callable[[int, DmsnnNetwork], None]] = None,
    progress: Optional[Callable[[int, WeightDeltaSummary], None]] = None,
) -> None:
    """Stream (theta, xdot, thetadot) triples through training iterations.

    ``on_checkpoint(iteration, net)`` fires after the given iteration counts
    (0 means before any training). Raises if the stream runs dry early.
    """
    if iterations < 0:
        raise ConfigError(f"iterations must be >= 0, got {iterations}")
    pending = sorted(set(int(c) for c in checkpoint_iters))
    for c in pending:
        if c < 0 or c > iterations:
            raise ConfigError(f"checkpoint {c} outside [0, {iterations}]")
    if pending and pending[0] == 0:
        if on_checkpoint is not None:
            on_checkpoint(0, net)
        pending.pop(0)
    it = iter(samples)
    for k in range(1, iterations + 1):
        try:
            theta, xdot, thetadot = next(it)
        except StopIteration:
            raise ConfigError(
                f"training sample stream exhausted after {k - 1} of {iterations} iterations"
            ) from None
        _, summary = net.training_step(theta, xdot, thetadot)
        if progress is not None:
            progress(k, summary)
        while pending and pending[0] == k:
            if on_checkpoint is not None:
                on_checkpoint(k, net)
            pending.pop(0)


# -- weight archive -------------------------------------------------------


def _format_float(x: float) -> str:
    return format(float(x), ".17g")


def _format_ranges(ranges: Ranges) -> str:
    return ";".join(f"{_format_float(lo)}:{_format_float(hi)}" for lo, hi in ranges)


def _parse_ranges(text: str) -> tuple[tuple[float, float], ...]:
    pairs = []
    for part in text.split(";"):
        lo, _, hi = part.partition(":")
        pairs.append((float(lo), float(hi)))
    return tuple(pairs)


def config_to_items(cfg: NetworkConfig) -> dict[str, str]:
    """Flat key=value view of a NetworkConfig (archive header vocabulary)."""
    sp, mp, st = cfg.sensory_params, cfg.motor_params, cfg.stdp
    items = {
        "n": str(cfg.n),
        "m": str(cfg.m),
        "n_l": str(cfg.n_l),
        "seed": str(cfg.seed),
        "pairing": cfg.pairing,
        "c_i": _format_float(cfg.c_i),
        "c_e": _format_float(cfg.c_e),
        "sigma_n": _format_float(cfg.sigma_n),
        "iteration_ms": _format_float(cfg.iteration_ms),
        "decode_window_ms": _format_float(cfg.decode_window_ms),
        "gain": _format_float(cfg.gain),
        "dt": _format_float(cfg.dt),
        "syn_scale": _format_float(cfg.syn_scale),
        "syn_tau_ms": _format_float(cfg.syn_tau_ms),
        "inh_tau_ms": _format_float(cfg.inh_tau_ms),
        "init_weight_scale": _format_float(cfg.init_weight_scale),
        "sensory_a": _format_float(sp.a),
        "sensory_b": _format_float(sp.b),
        "sensory_c": _format_float(sp.c),
        "sensory_d": _format_float(sp.d),
        "motor_a": _format_float(mp.a),
        "motor_b": _format_float(mp.b),
        "motor_c": _format_float(mp.c),
        "motor_d": _format_float(mp.d),
        "stdp_rule": st.rule,
        "stdp_s": _format_float(st.s),
        "stdp_tau1": _format_float(st.tau1),
        "stdp_tau2": _format_float(st.tau2),
        "stdp_s_a": _format_float(st.s_a),
        "stdp_s_b": _format_float(st.s_b),
        "stdp_tau_a": _format_float(st.tau_a),
        "stdp_tau_b": _format_float(st.tau_b),
        "stdp_window": _format_float(st.window),
        "stdp_exponent_sign": st.exponent_sign,
        "theta_ranges": _format_ranges(cfg.theta_ranges),
        "xdot_ranges": _format_ranges(cfg.xdot_ranges),
        "thetadot_ranges": _format_ranges(cfg.thetadot_ranges),
    }
    return items


def config_from_items(items: dict[str, str]) -> NetworkConfig:
    """Inverse of :func:`config_to_items`; raises ConfigError on missing keys."""
    try:
        return NetworkConfig(
            n=int(items["n"]),
            m=int(items["m"]),
            n_l=int(items["n_l"]),
            seed=int(items["seed"]),
            pairing=items["pairing"],
            c_i=float(items["c_i"]),
            c_e=float(items["c_e"]),
            sigma_n=float(items["sigma_n"]),
            iteration_ms=float(items["iteration_ms"]),
            decode_window_ms=float(items["decode_window_ms"]),
            gain=float(items["gain"]),
            dt=float(items["dt"]),
            syn_scale=float(items["syn_scale"]),
            syn_tau_ms=float(items["syn_tau_ms"]),
            inh_tau_ms=float(items["inh_tau_ms"]),
            init_weight_scale=float(items["init_weight_scale"]),
            sensory_params=NeuronParams(
                float(items["sensory_a"]),
                float(items["sensory_b"]),
                float(items["sensory_c"]),
                float(items["sensory_d"]),
            ),
            motor_params=NeuronParams(
                float(items["motor_a"]),
                float(items["motor_b"]),
                float(items["motor_c"]),
                float(items["motor_d"]),
            ),
            stdp=StdpConfig(
                rule=items["stdp_rule"],
                s=float(items["stdp_s"]),
                tau1=float(items["stdp_tau1"]),
                tau2=float(items["stdp_tau2"]),
                s_a=float(items["stdp_s_a"]),
                s_b=float(items["stdp_s_b"]),
                tau_a=float(items["stdp_tau_a"]),
                tau_b=float(items["stdp_tau_b"]),
                window=float(items["stdp_window"]),
                exponent_sign=items["stdp_exponent_sign"],
            ),
            theta_ranges=_parse_ranges(items["theta_ranges"]),
            xdot_ranges=_parse_ranges(items["xdot_ranges"]),
            thetadot_ranges=_parse_ranges(items["thetadot_ranges"]),
        )
    except KeyError as exc:
        raise ConfigError(f"missing configuration key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"bad configuration value: {exc}") from None


def snapshot(net: DmsnnNetwork, extra_header: Optional[dict[str, str]] = None) -> str:
    """Serialize config and weights as line-oriented text.

    Header: ``#format=...`` first, then sorted ``#key=value`` lines; rows
    are ``pre_bundle,pre_idx,post_bundle,post_idx,weight`` with weights at
    17 significant digits for a bit-exact round trip.
    """
    cfg = net.config
    items = config_to_items(cfg)
    if extra_header:
        for key, val in extra_header.items():
            if key == "format" or "=" in key or "\n" in str(val):
                raise ConfigError(f"bad extra header entry {key!r}")
            items.setdefault(key, str(val))
    lines = [f"#format={ARCHIVE_FORMAT}"]
    lines += [f"#{k}={items[k]}" for k in sorted(items)]
    n_l = cfg.n_l
    off = cfg.n + cfg.m
    W = net.engine.weights
    for i in range(W.shape[0]):
        pre_b, pre_i = divmod(i, n_l)
        for j in range(W.shape[1]):
            post_b, post_j = divmod(j, n_l)
            lines.append(f"{pre_b},{pre_i},{off + post_b},{post_j},{_format_float(W[i, j])}")
    return "\n".join(lines) + "\n"


def parse_archive_header(text: str) -> dict[str, str]:
    """Return the #key=value header entries of an archive (format line checked)."""
    lines = text.splitlines()
    if not lines or lines[0] != f"#format={ARCHIVE_FORMAT}":
        raise ArchiveParseError(f"line 1: expected '#format={ARCHIVE_FORMAT}' header")
    items: dict[str, str] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.startswith("#"):
            break
        key, sep, val = line[1:].partition("=")
        if not sep or not key:
            raise ArchiveParseError(f"line {lineno}: malformed header line {line!r}")
        if key in items:
            raise ArchiveParseError(f"line {lineno}: duplicate header key {key!r}")
        items[key] = val
    return items


def restore(text: str) -> DmsnnNetwork:
    """Rebuild a network from :func:`snapshot` output.

    Weights are restored bit-exactly; dynamic state starts at rest. Extra
    header keys (e.g. experiment settings echoed by the CLI) are ignored
    here and can be read back via :func:`parse_archive_header`.
    """
    items = parse_archive_header(text)
    cfg = config_from_items(items)
    net = DmsnnNetwork(cfg)
    W = net.engine.weights
    W.fill(np.nan)
    n_l = cfg.n_l
    off = cfg.n + cfg.m
    n_rows_expected = W.shape[0] * W.shape[1]
    n_rows = 0
    lines = text.splitlines()
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            continue
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise ArchiveParseError(
                f"line {lineno}: expected 5 comma-separated fields, got {len(fields)}"
            )
        try:
            pre_b, pre_i, post_b, post_j = (int(f) for f in fields[:4])
            w = float(fields[4])
        except ValueError:
            raise ArchiveParseError(f"line {lineno}: malformed row {line!r}") from None
        if not 0 <= pre_b < off or not 0 <= pre_i < n_l:
            raise ArchiveParseError(f"line {lineno}: presynaptic index out of range")
        if not off <= post_b < off + cfg.m or not 0 <= post_j < n_l:
            raise ArchiveParseError(f"line {lineno}: postsynaptic index out of range")
        if not math.isfinite(w):
            raise ArchiveParseError(f"line {lineno}: non-finite weight")
        row = pre_b * n_l + pre_i
        col = (post_b - off) * n_l + post_j
        if not math.isnan(W[row, col]):
            raise ArchiveParseError(f"line {lineno}: duplicate synapse row")
        W[row, col] = w
        n_rows += 1
    if n_rows != n_rows_expected:
        raise ArchiveParseError(
            f"line {len(lines)}: expected {n_rows_expected} synapse rows, got {n_rows}"
        )
    return net


# -- summation benchmark ---------------------------------------------------


class _JointGridNetwork:
    """Two inputs encoded jointly on an n_l x n_l grid feeding one motor bundle."""

    def __init__(self, cfg: NetworkConfig, in_range: tuple[float, float], out_range: tuple[float, float]):
        n_l = cfg.n_l
        self.cfg = cfg
        self.in_a = make_bundle(in_range, n_l, cfg.sensory_params)
        self.in_b = make_bundle(in_range, n_l, cfg.sensory_params)
        self.out = make_bundle(out_range, n_l, cfg.motor_params)
        self.rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        weights = self.rng.uniform(0.0, cfg.init_weight_scale * cfg.c_e, (n_l * n_l, n_l))
        self.engine = _SpikingEngine(n_l * n_l, 1, cfg, weights)
        self.i_star_sensory = rheobase(cfg.sensory_params)
        self.i_star_motor = rheobase(cfg.motor_params)

    def _sensory_currents(self, a: float, b: float) -> np.ndarray:
        joint = encode_joint_2d(self.in_a, self.in_b, a, b).ravel()
        return activation_to_current(joint, self.i_star_sensory, self.cfg.gain)

    def training_step(self, a: float, b: float, target: float) -> None:
        cfg = self.cfg
        i_sens = self._sensory_currents(a, b)
        i_mot = activation_to_current(
            encode(self.out, target), self.i_star_motor, cfg.gain
        )
        n_steps = int(round(cfg.iteration_ms / cfg.dt))
        sens_hist, mot_hist = self.engine.run(i_sens, i_mot, n_steps, collect_sens=True)
        self.engine.apply_stdp(sens_hist, mot_hist)

    def decode_step(self, a: float, b: float) -> float:
        cfg = self.cfg
        i_sens = self._sensory_currents(a, b)
        n_steps = int(round(cfg.decode_window_ms / cfg.dt))
        _, mot_hist = self.engine.run(i_sens, np.zeros(self.engine.n_mot), n_steps, False)
        counts = mot_hist.sum(axis=0).astype(float)
        try:
            return decode(self.out, counts)
        except NoActivityError:
            return 0.0


SUMMATION_LAYOUTS = ("separate-1d", "joint-2d")


def summation_experiment(
    layout: str,
    trials: int,
    seed: int,
    n_l: int = 36,
    eval_count: int = 500,
    settle_ms: float = 20.0,
    config: Optional[NetworkConfig] = None,
) -> float:
    """Train the chosen layout on random (a, b, a+b) triples; report the
    mean held-out decode error as a percentage of the output range.

    Inputs are uniform on [0, 1] so the output bundle covers [0, 2].
    """
    if layout not in SUMMATION_LAYOUTS:
        raise ConfigError(f"layout must be one of {SUMMATION_LAYOUTS}, got {layout!r}")
    if trials < 100:
        raise ConfigError(f"summation benchmark needs >= 100 training trials, got {trials}")
    if eval_count < 1:
        raise ConfigError(f"eval_count must be >= 1, got {eval_count}")
    base = config if config is not None else NetworkConfig(
        n=1,
        m=1,
        theta_ranges=((0.0, 1.0),),
        xdot_ranges=((0.0, 1.0),),
        thetadot_ranges=((0.0, 2.0),),
        n_l=n_l,
        seed=seed,
    )
    base = replace(base, n=1, m=1, n_l=n_l, seed=seed,
                   theta_ranges=((0.0, 1.0),),
                   xdot_ranges=((0.0, 1.0),),
                   thetadot_ranges=((0.0, 2.0),))
    data_rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    eval_rng = np.random.default_rng(np.random.SeedSequence((seed, 2)))

    if layout == "separate-1d":
        net = DmsnnNetwork(base)

        def train_one(a: float, b: float) -> None:
            net.training_step([a], [b], [a + b])

        def eval_one(a: float, b: float) -> float:
            net.reset_dynamic_state()
            _settle(net.engine, net._sensory_currents(np.array([a]), np.array([b])), settle_ms, base)
            return float(net.control_step([a], [b])[0])

    else:
        grid = _JointGridNetwork(base, (0.0, 1.0), (0.0, 2.0))

        def train_one(a: float, b: float) -> None:
            grid.training_step(a, b, a + b)

        def eval_one(a: float, b: float) -> float:
            grid.engine.reset_state()
            _settle(grid.engine, grid._sensory_currents(a, b), settle_ms, base)
            return grid.decode_step(a, b)

    for _ in range(trials):
        a, b = data_rng.uniform(0.0, 1.0, 2)
        train_one(a, b)

    out_span = 2.0
    err = 0.0
    for _ in range(eval_count):
        a, b = eval_rng.uniform(0.0, 1.0, 2)
        err += abs(eval_one(a, b) - (a + b))
    return err / eval_count / out_span * 100.0


def _settle(engine: _SpikingEngine, i_sens: np.ndarray, settle_ms: float, cfg: NetworkConfig) -> None:
    """Run the input without scoring so motor activity reaches steady state."""
    n_steps = int(round(settle_ms / cfg.dt))
    if n_steps > 0:
        engine.run(i_sens, np.zeros(engine.n_mot), n_steps, collect_sens=False)
