"""Adam optimizer over a dict of parameter arrays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch
from .network import Params


@dataclass
class AdamState:
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Params) -> "AdamState":
        return cls({k: np.zeros_like(p) for k, p in params.items()}, {k: np.zeros_like(p) for k, p in params.items()})


def optimizer_step(params: Params, grads: Params, state: AdamState, lr: float) -> Params:
    """Apply one bias-corrected Adam update in place and return ``params``."""
    if set(grads) != set(params):
        raise ShapeMismatch(f"gradient keys {sorted(set(grads) ^ set(params))} do not match parameters")
    for k, g in grads.items():
        if g.shape != params[k].shape:
            raise ShapeMismatch(f"{k}: gradient shape {g.shape} != parameter shape {params[k].shape}")
        if k not in state.m:
            state.m[k] = np.zeros_like(params[k])
            state.v[k] = np.zeros_like(params[k])
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    for k in sorted(params):
        g = grads[k]
        m = state.m[k]
        v = state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        params[k] -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params
