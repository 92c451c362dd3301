"""Population coding: Gaussian tuning curves and center-voting decode.

A *bundle* is a 1-D array of neurons whose evenly spaced preferred values
cover one scalar variable. Encoding turns a value into per-neuron
activations in [0, 1]; decoding turns non-negative activity (analog
activations or spike counts) back into a scalar by a weighted vote of the
preferred values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractError, NoActivityError, NumericDomainError
from .izhikevich import NeuronParams, rest_state


@dataclass
class Bundle:
    """One scalar dimension encoded by ``n_l`` tuning-curve neurons.

    ``v`` and ``u`` carry the per-neuron dynamic state so a bundle can be
    stepped as a unit; both start at the resting attractor of ``params``.
    """

    centers: np.ndarray      # preferred values, evenly spaced over the range
    sigma: float             # tuning width, same units as the encoded variable
    psi_min: float
    psi_max: float
    n_l: int
    params: NeuronParams
    v: np.ndarray = field(repr=False, default=None)
    u: np.ndarray = field(repr=False, default=None)

    def reset_state(self) -> None:
        rest = rest_state(self.params)
        self.v = np.full(self.n_l, rest.v, dtype=float)
        self.u = np.full(self.n_l, rest.u, dtype=float)


def make_bundle(
    value_range: tuple[float, float],
    n_l: int,
    params: NeuronParams,
    sigma_scale: float = 1.0,
) -> Bundle:
    """Build a bundle over ``value_range`` with sigma = span / n_l * sigma_scale."""
    lo, hi = float(value_range[0]), float(value_range[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or not hi > lo:
        raise ConfigError(f"bundle range must satisfy max > min, got [{lo}, {hi}]")
    if n_l < 2:
        raise ConfigError(f"a bundle needs at least 2 neurons, got {n_l}")
    if not sigma_scale > 0:
        raise ConfigError(f"sigma_scale must be > 0, got {sigma_scale}")
    bundle = Bundle(
        centers=np.linspace(lo, hi, n_l),
        sigma=(hi - lo) / n_l * sigma_scale,
        psi_min=lo,
        psi_max=hi,
        n_l=n_l,
        params=params,
    )
    bundle.reset_state()
    return bundle


def encode(bundle: Bundle, psi: float) -> np.ndarray:
    """Gaussian activation of each neuron for input ``psi``.

    alpha_i = exp(-(psi - center_i)^2 / (2 sigma^2)). Out-of-range inputs
    are allowed; their activations simply decay.
    """
    if not math.isfinite(psi):
        raise NumericDomainError(f"encoded value must be finite, got {psi}")
    diff = psi - bundle.centers
    return np.exp(-(diff * diff) / (2.0 * bundle.sigma * bundle.sigma))


def encode_joint_2d(
    bundle_a: Bundle, bundle_b: Bundle, psi_a: float, psi_b: float
) -> np.ndarray:
    """Joint 2-D activation: outer product of the two 1-D encodings."""
    return np.outer(encode(bundle_a, psi_a), encode(bundle_b, psi_b))


def decode(bundle: Bundle, activity: np.ndarray) -> float:
    """Center-voting decode: sum(center_i * act_i) / sum(act_i).

    ``activity`` may be analog activations or spike counts within a window.
    Raises :class:`NoActivityError` when every entry is zero; the caller
    decides the fallback (the network holds at 0 during servoing).
    """
    act = np.asarray(activity, dtype=float)
    if act.shape != (bundle.n_l,):
        raise ContractError(
            f"activity must have shape ({bundle.n_l},), got {act.shape}"
        )
    if (act < 0).any():
        raise ContractError("activity entries must be non-negative")
    total = act.sum()
    if total == 0.0:
        raise NoActivityError("all-zero activity has no decodable value")
    return float(np.dot(bundle.centers, act) / total)


def activation_to_current(alpha, i_star: float, gain: float):
    """Input current for an activation: I = alpha * gain * i_star.

    With gain > 1 a neuron at the center of its tuning curve (alpha = 1)
    fires continuously while weakly activated neighbours stay just below
    rheobase. Works elementwise on arrays.
    """
    return alpha * gain * i_star
