"""Shunting neural dynamics: a bounded, smooth, low-pass scalar element.

The state obeys

    dV/dt = -A V + (B - V) f(e) - (D + V) g(e),
    f(e) = max(e, 0),  g(e) = max(0, -e),

so for a held input the equation is linear in V with rate A + |e| and a
fixed point inside [-D, B].  Both controllers route their switching error
through one of these channels: the output starts at zero, follows the
input sign, and can never leave [-D, B], which is what removes speed
jumps and chattering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ShuntingParams:
    """Passive decay rate and output bounds, all positive."""

    decay: float
    upper: float
    lower: float

    def __post_init__(self) -> None:
        for name in ("decay", "upper", "lower"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"shunting.{name} must be strictly positive")


@dataclass(frozen=True)
class ShuntingState:
    v_s: float = 0.0


def f_pos(e: float) -> float:
    """Excitatory part: max(e, 0)."""
    return e if e > 0.0 else 0.0


def g_neg(e: float) -> float:
    """Inhibitory part: max(0, -e).  Note e = f_pos(e) - g_neg(e) exactly."""
    return -e if e < 0.0 else 0.0


def shunting_step(
    state: ShuntingState, params: ShuntingParams, input_e: float, dt: float
) -> ShuntingState:
    """Advance one step with the input held constant over dt.

    For a held input the dynamics are linear, so the step uses the exact
    exponential update

        V+ = target + (V - target) exp(-k dt),
        k = A + f + g,  target = (B f - D g) / k,

    a convex combination of V and a target inside [-D, B].  Unlike an
    explicit Euler step this keeps the state inside [-D, B] for any dt.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    f = f_pos(input_e)
    g = g_neg(input_e)
    k = params.decay + f + g
    target = (params.upper * f - params.lower * g) / k
    decay = math.exp(-k * dt)
    return ShuntingState(v_s=target + (state.v_s - target) * decay)
