"""Brusselator chemistry: parameters, reactions, equilibrium and linearisation."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import InvalidArgumentError


@dataclass(frozen=True)
class BrusselatorParams:
    """Feed concentrations ``A``, ``B`` and diffusivities ``d_u``, ``d_v``.

    Values outside the ODE-stable activator regime ``1 < B < 1 + A**2`` are
    accepted; check :attr:`in_stable_regime` before relying on the stability
    theory.
    """

    A: float = 1.0
    B: float = 1.8
    d_u: float = 5e-5
    d_v: float = 2e-3

    def __post_init__(self):
        for name in ("A", "B", "d_u", "d_v"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be finite and > 0, got {value!r}")

    @property
    def in_stable_regime(self) -> bool:
        return 1.0 < self.B < 1.0 + self.A**2

    def replace(self, **changes) -> "BrusselatorParams":
        fields = {"A": self.A, "B": self.B, "d_u": self.d_u, "d_v": self.d_v}
        fields.update(changes)
        return BrusselatorParams(**fields)


@dataclass(frozen=True)
class LinearCoefficients:
    a: float
    b: float
    c: float
    d: float

    @property
    def trace_T(self) -> float:
        return self.a + self.d

    @property
    def det_D(self) -> float:
        return self.a * self.d - self.b * self.c

    def matrix(self):
        return ((self.a, self.b), (self.c, self.d))


@dataclass(frozen=True)
class OdeStabilityReport:
    eigenvalues: tuple[complex, complex]
    decay_rate: float
    stable: bool


def equilibrium(params: BrusselatorParams) -> tuple[float, float]:
    """Homogeneous steady state ``(A, B/A)``."""
    return params.A, params.B / params.A


def reaction_terms(params: BrusselatorParams, u, v):
    """Reaction rates ``f = A - (B+1)u + u^2 v`` and ``g = B u - u^2 v``.

    Evaluated as ``g = u (B - u v)``, ``f = (A - u) - g`` so that both vanish
    exactly at ``(A, B/A)`` whenever ``A * (B/A) == B`` in floating point.
    Works elementwise on scalars or arrays.
    """
    g = u * (params.B - u * v)
    f = (params.A - u) - g
    return f, g


def linearize(params: BrusselatorParams) -> LinearCoefficients:
    A2 = params.A * params.A
    return LinearCoefficients(a=params.B - 1.0, b=A2, c=-params.B, d=-A2)


def classify_ode_stability(coeffs: LinearCoefficients) -> OdeStabilityReport:
    # local import: spectral depends on this module
    from .spectral import eig2

    lam = eig2(coeffs.matrix())
    decay = -max(z.real for z in lam)
    stable = coeffs.trace_T < 0 and coeffs.det_D > 0
    return OdeStabilityReport(eigenvalues=lam, decay_rate=decay, stable=stable)
