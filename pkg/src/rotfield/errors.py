"""Exception types shared across modules; the CLI maps them to exit codes."""

from __future__ import annotations

import numpy as np


class PreconditionError(ValueError):
    """A mathematical precondition fails at some point (CLI exit code 3).

    ``witness`` holds the offending ``(u, v)`` when one is known.
    """

    def __init__(self, message: str, witness=None):
        if witness is not None:
            message = f"{message} (at u={witness[0]:.17g}, v={witness[1]:.17g})"
        super().__init__(message)
        self.witness = witness


class NonIsothermalChart(PreconditionError):
    pass


class DegenerateChart(PreconditionError):
    pass


class HypothesisViolation(PreconditionError):
    """n1, n2 or d vanishes where the reduction to second order needs them nonzero."""


class NotElliptic(PreconditionError):
    pass


class NumericalFailure(RuntimeError):
    """Singular or ill-conditioned linear algebra (CLI exit code 4)."""


def first_witness(mask, u, v):
    """The ``(u, v)`` of the first True entry of ``mask``, or None."""
    mask = np.asarray(mask)
    if not mask.any():
        return None
    k = tuple(np.argwhere(mask)[0])
    u = np.broadcast_to(u, mask.shape)
    v = np.broadcast_to(v, mask.shape)
    return float(u[k]), float(v[k])
