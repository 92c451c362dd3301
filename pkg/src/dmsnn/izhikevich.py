"""Izhikevich neuron dynamics and phase-plane analysis.

The two-variable quadratic model

    dv/dt = 0.04 v^2 + 5 v + 140 - u + I
    du/dt = a (b v - u)

spikes when v reaches 30 mV and resets with ``v <- c, u <- u + d``.
Besides the integrator this module provides the phase-plane toolkit
(nullcline intersections, linearization, stability classes, rheobase)
used to tune neuron parameters for the mapping network.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, NumericDomainError

SPIKE_PEAK_MV = 30.0

# |trace| / |det| below this count as a classification tie.
DEGENERACY_TOL = 1e-12

# |discriminant| below this means the nullclines touch in a single point.
_DISCRIMINANT_TOL = 1e-10


@dataclass(frozen=True)
class NeuronParams:
    """Static neuron parameters (a, b, c, d)."""

    a: float  # recovery time scale (1/ms)
    b: float  # sub-threshold sensitivity of u to v
    c: float  # post-spike reset potential (mV)
    d: float  # post-spike recovery increment

    def __post_init__(self) -> None:
        vals = (self.a, self.b, self.c, self.d)
        if not all(math.isfinite(x) for x in vals):
            raise ConfigError(f"neuron parameters must be finite, got {vals}")
        if not self.a > 0:
            raise ConfigError(f"recovery time scale a must be > 0, got {self.a}")
        if not self.c < SPIKE_PEAK_MV:
            raise ConfigError(
                f"reset potential c must lie below the {SPIKE_PEAK_MV} mV peak, got {self.c}"
            )


#: Classic fast-spiking parameters, used for all sensory bundles.
FAST_SPIKING = NeuronParams(a=0.1, b=0.2, c=-65.0, d=2.0)

#: Integrator parameters tuned for the motor bundles (coincidence detection
#: with b raised until sensory drive alone sits at the verge of firing).
MOTOR_INTEGRATOR = NeuronParams(a=0.02, b=0.15, c=-55.0, d=6.0)


@dataclass(frozen=True)
class NeuronState:
    """Dynamic state (membrane potential v, recovery u)."""

    v: float
    u: float
    last_spike: Optional[float] = None


@dataclass(frozen=True)
class Equilibrium:
    """A nullcline intersection and its linearized stability class."""

    v_star: float
    u_star: float
    kind: str


STABILITY_KINDS = frozenset(
    {"stable-node", "stable-focus", "saddle", "unstable-node", "unstable-focus", "degenerate"}
)


def _check_finite(**named: float) -> None:
    for name, val in named.items():
        if not math.isfinite(val):
            raise NumericDomainError(f"{name} must be finite, got {val}")


def step(
    state: NeuronState,
    params: NeuronParams,
    i_ext: float,
    dt: float = 1.0,
    t: float = 0.0,
) -> tuple[NeuronState, bool]:
    """Advance one forward-Euler step of size ``dt`` (ms).

    v integrates in two dt/2 sub-steps (capped at the 30 mV peak after each
    so spike amplitude is deterministic), then u in one full step using the
    updated v. A state already at or above the peak resets verbatim without
    integrating. ``t`` is the simulation time at the start of the step and
    is only used to stamp ``last_spike``.

    Returns ``(new_state, spiked)``.
    """
    _check_finite(v=state.v, u=state.u, i_ext=i_ext)
    if not 0.0 < dt <= 1.0:
        raise ConfigError(f"dt must lie in (0, 1] ms, got {dt}")

    if state.v >= SPIKE_PEAK_MV:
        return NeuronState(params.c, state.u + params.d, last_spike=t), True

    v, u = state.v, state.u
    half = 0.5 * dt
    v = min(v + half * (0.04 * v * v + 5.0 * v + 140.0 - u + i_ext), SPIKE_PEAK_MV)
    v = min(v + half * (0.04 * v * v + 5.0 * v + 140.0 - u + i_ext), SPIKE_PEAK_MV)
    u = u + dt * params.a * (params.b * v - u)

    if v >= SPIKE_PEAK_MV:
        return NeuronState(params.c, u + params.d, last_spike=t + dt), True
    return NeuronState(v, u, last_spike=state.last_spike), False


def step_arrays(
    v: np.ndarray,
    u: np.ndarray,
    params: NeuronParams,
    i_ext: np.ndarray,
    dt: float,
) -> np.ndarray:
    """Vectorized ``step`` over parallel state arrays; mutates v and u in place.

    Same scheme as :func:`step` (two capped half-steps on v, one on u,
    reset on peak). Returns the boolean spike mask.
    """
    half = 0.5 * dt
    np.minimum(v + half * (0.04 * v * v + 5.0 * v + 140.0 - u + i_ext), SPIKE_PEAK_MV, out=v)
    np.minimum(v + half * (0.04 * v * v + 5.0 * v + 140.0 - u + i_ext), SPIKE_PEAK_MV, out=v)
    u += dt * (params.a * (params.b * v - u))
    fired = v >= SPIKE_PEAK_MV
    if fired.any():
        v[fired] = params.c
        u[fired] += params.d
    return fired


def linearize(params: NeuronParams, v_star: float) -> np.ndarray:
    """Jacobian of (dv/dt, du/dt) at an equilibrium with potential ``v_star``."""
    _check_finite(v_star=v_star)
    return np.array(
        [[0.08 * v_star + 5.0, -1.0], [params.a * params.b, -params.a]], dtype=float
    )


def classify(L: np.ndarray) -> str:
    """Stability class of a 2x2 linearization via trace/determinant.

    det < 0 is a saddle; det > 0 splits on the trace sign, focus vs node on
    trace^2 against 4 det. Ties within ``DEGENERACY_TOL`` are 'degenerate'.
    """
    L = np.asarray(L, dtype=float)
    if L.shape != (2, 2):
        raise ConfigError(f"expected a 2x2 matrix, got shape {L.shape}")
    if not np.isfinite(L).all():
        raise NumericDomainError("linearization matrix has non-finite entries")
    tr = L[0, 0] + L[1, 1]
    det = L[0, 0] * L[1, 1] - L[0, 1] * L[1, 0]
    if abs(det) <= DEGENERACY_TOL:
        return "degenerate"
    if det < 0:
        return "saddle"
    if abs(tr) <= DEGENERACY_TOL:
        return "degenerate"
    stem = "stable" if tr < 0 else "unstable"
    shape = "focus" if tr * tr < 4.0 * det else "node"
    return f"{stem}-{shape}"


def equilibria(params: NeuronParams, i_ext: float = 0.0) -> list[Equilibrium]:
    """Nullcline intersections for a constant input current.

    Solves 0.04 v^2 + (5 - b) v + 140 + I = 0 with u* = b v*. Returns 0, 1
    (nullclines touching) or 2 classified equilibria, ascending in v*.
    """
    _check_finite(i_ext=i_ext)
    coef_b = 5.0 - params.b
    coef_c = 140.0 + i_ext
    disc = coef_b * coef_b - 4.0 * 0.04 * coef_c
    if disc < -_DISCRIMINANT_TOL:
        return []
    if disc <= _DISCRIMINANT_TOL:
        v_star = -coef_b / 0.08
        roots = [v_star]
    else:
        sq = math.sqrt(disc)
        roots = sorted([(-coef_b - sq) / 0.08, (-coef_b + sq) / 0.08])
    return [
        Equilibrium(v, params.b * v, classify(linearize(params, v))) for v in roots
    ]


def rheobase(params: NeuronParams) -> float:
    """Minimum constant current for continuous spiking.

    The current at which the v- and u-nullclines touch in a single point:
    I* = (5 - b)^2 / (4 * 0.04) - 140.
    """
    return (5.0 - params.b) ** 2 / (4.0 * 0.04) - 140.0


def rest_state(params: NeuronParams) -> NeuronState:
    """Deterministic initial state: the resting attractor at I = 0.

    Falls back to (c, b*c) when no equilibrium exists (neuron tonically
    active even at zero input).
    """
    eqs = equilibria(params, 0.0)
    for eq in eqs:
        if eq.kind.startswith("stable"):
            return NeuronState(eq.v_star, eq.u_star)
    if eqs:
        return NeuronState(eqs[0].v_star, eqs[0].u_star)
    return NeuronState(params.c, params.b * params.c)


def simulate(
    params: NeuronParams,
    i_ext: float,
    duration_ms: float,
    dt: float = 1.0,
    state: Optional[NeuronState] = None,
) -> np.ndarray:
    """Integrate a single neuron under constant current; returns spike times (ms)."""
    if state is None:
        state = rest_state(params)
    n_steps = int(round(duration_ms / dt))
    times = []
    t = 0.0
    for _ in range(n_steps):
        state, spiked = step(state, params, i_ext, dt=dt, t=t)
        t += dt
        if spiked:
            times.append(state.last_spike)
    return np.asarray(times, dtype=float)
