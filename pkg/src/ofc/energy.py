"""Region energies whose minimizers maximize a classification measure.

For the F-beta measure the energy of a decision field u is

    E[u] = (k * B + C) / A,   k = beta**2 * p_count / n_count,

where, writing H for the smoothed step at width eps and f+/f- for the
unit-mass class densities,

    A = integral H(u) f+     (true-positive fraction)
    B = integral H(-u) f+    (false-negative fraction)
    C = integral H(u) f-     (false-positive fraction).

E is proportional to the misclassification ratio (beta**2*FN + FP)/TP, so
driving E down drives F-beta up.  For the accuracy measure the energy is
the count-scaled error mass

    E[u] = p_count * B + n_count * C,

minimized where the positive region is exactly the set where
p_count*f+ > n_count*f-.

Two descent directions are available: the first variation of E, and a
cheaper surrogate proportional to it (the scale factor is A**2 with k
replaced by beta**2), which has the same zero set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import DensityPair
from .errors import VanishingPositiveMassError
from .field import ScalarField, integrate
from .metrics import smoothed_delta, smoothed_heaviside

_MASS_FLOOR = 1e-12
_BAND_FRACTION = 1e-3


@dataclass(frozen=True)
class MeasureEnergy:
    """Energy functional for one density pair, measure and smoothing width.

    kind "f_measure" uses beta (and an optional explicit k overriding the
    default beta**2 * p_count / n_count); kind "accuracy" ignores both.
    """

    pair: DensityPair
    eps: float
    kind: str = "f_measure"
    beta: float = 1.0
    k: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in ("f_measure", "accuracy"):
            raise ValueError(f"unknown energy kind {self.kind!r}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.kind == "accuracy":
            if self.k is not None:
                raise ValueError("k only applies to the f_measure energy")
        elif self.k is None:
            object.__setattr__(
                self, "k", self.beta**2 * self.pair.p_count / self.pair.n_count
            )
        elif self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")

    def _fractions(self, u: ScalarField) -> tuple[float, float, float]:
        """(A, B, C); raises once the positive region loses all f+ mass."""
        h = smoothed_heaviside(u.values, self.eps)
        a = integrate(u.with_values(h * self.pair.f_pos.values))
        b = integrate(u.with_values((1.0 - h) * self.pair.f_pos.values))
        c = integrate(u.with_values(h * self.pair.f_neg.values))
        if self.kind == "f_measure" and a < _MASS_FLOOR:
            raise VanishingPositiveMassError(
                f"positive region holds {a:.3e} of the positive density"
            )
        return a, b, c

    def evaluate(self, u: ScalarField) -> float:
        a, b, c = self._fractions(u)
        if self.kind == "accuracy":
            return self.pair.p_count * b + self.pair.n_count * c
        return (self.k * b + c) / a

    def gradient(self, u: ScalarField) -> ScalarField:
        """First variation of the energy at u, as a field on the same grid."""
        delta = smoothed_delta(u.values, self.eps)
        fp, fn = self.pair.f_pos.values, self.pair.f_neg.values
        if self.kind == "accuracy":
            return u.with_values(
                delta * (self.pair.n_count * fn - self.pair.p_count * fp)
            )
        a, b, c = self._fractions(u)
        e = (self.k * b + c) / a
        return u.with_values(delta * (fn - (self.k + e) * fp) / a)

    def descent_direction(self, u: ScalarField, kind: str = "derivative") -> ScalarField:
        """Field to subtract (times dt) from u; "derivative" or "G"."""
        if kind == "derivative":
            return self.gradient(u)
        if kind != "G":
            raise ValueError(f"unknown descent kind {kind!r}")
        if self.kind != "f_measure":
            raise ValueError("descent kind 'G' only applies to the f_measure energy")
        a, b, c = self._fractions(u)
        delta = smoothed_delta(u.values, self.eps)
        fp, fn = self.pair.f_pos.values, self.pair.f_neg.values
        b2 = self.beta**2
        return u.with_values(delta * ((fn - b2 * fp) * a - fp * (c + b2 * b)))

    def stationarity_residual(self, u: ScalarField) -> float:
        """Largest gradient magnitude on the active band around the zero set.

        The band is where the smoothed impulse exceeds 1e-3 of its current
        maximum; outside it the flow cannot move u regardless of the
        densities.
        """
        delta = smoothed_delta(u.values, self.eps)
        band = delta > _BAND_FRACTION * delta.max()
        return float(np.abs(self.gradient(u).values[band]).max())
