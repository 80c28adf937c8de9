"""Closed-form potential families for confining and interaction terms.

Every family evaluates its value and first two derivatives exactly
(no numerical differentiation).  Families that are polynomials also
expose the monomial coefficients of their derivative, which enables the
power-sum fast path in :mod:`ipskernel.simulate`; non-polynomial
families report ``degree = None``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _trimmed_degree(coeffs) -> int:
    """Degree of an ascending coefficient tuple, 0 for the zero polynomial."""
    deg = 0
    for i, ci in enumerate(coeffs):
        if ci != 0.0:
            deg = i
    return deg


@dataclass(frozen=True)
class Quadratic:
    """a*x^2/2; the classic harmonic confinement, derivative a*x."""

    a: float = 1.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.a * x * x

    def derivative(self, x):
        return self.a * np.asarray(x, dtype=float)

    def second_derivative(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.a)

    @property
    def degree(self) -> Optional[int]:
        return 2

    def derivative_coefficients(self) -> Optional[np.ndarray]:
        return np.array([0.0, self.a])


@dataclass(frozen=True)
class Bistable:
    """x^4/4 - x^2/2; double well with derivative x^3 - x."""

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.25 * x**4 - 0.5 * x * x

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return x**3 - x

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        return 3.0 * x * x - 1.0

    @property
    def degree(self) -> Optional[int]:
        return 4

    def derivative_coefficients(self) -> Optional[np.ndarray]:
        return np.array([0.0, -1.0, 0.0, 1.0])


@dataclass(frozen=True)
class Cosh:
    """cosh(x); smooth superlinear well, derivative sinh(x)."""

    def value(self, x):
        return np.cosh(np.asarray(x, dtype=float))

    def derivative(self, x):
        return np.sinh(np.asarray(x, dtype=float))

    def second_derivative(self, x):
        return np.cosh(np.asarray(x, dtype=float))

    @property
    def degree(self) -> Optional[int]:
        return None

    def derivative_coefficients(self) -> Optional[np.ndarray]:
        return None


@dataclass(frozen=True)
class MorseLike:
    """D*(1 - exp(-a*(x^2 - r^2)))^2; attractive/repulsive pair well."""

    D: float = 5.0
    a: float = 0.5
    r: float = 1.0

    def _inner(self, x):
        return np.exp(-self.a * (x * x - self.r * self.r))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        e = self._inner(x)
        return self.D * (1.0 - e) ** 2

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        e = self._inner(x)
        return 4.0 * self.D * self.a * x * e * (1.0 - e)

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        e = self._inner(x)
        # d/dx [4 D a x e (1-e)] with e' = -2 a x e
        return 4.0 * self.D * self.a * (
            e * (1.0 - e) - 2.0 * self.a * x * x * e * (1.0 - 2.0 * e)
        )

    @property
    def degree(self) -> Optional[int]:
        return None

    def derivative_coefficients(self) -> Optional[np.ndarray]:
        return None


@dataclass(frozen=True)
class GaussianWell:
    """-A/sqrt(2*pi) * exp(-x^2/2); attractive Gaussian interaction."""

    A: float = 5.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return -self.A / _SQRT_2PI * np.exp(-0.5 * x * x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return self.A / _SQRT_2PI * x * np.exp(-0.5 * x * x)

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        return self.A / _SQRT_2PI * (1.0 - x * x) * np.exp(-0.5 * x * x)

    @property
    def degree(self) -> Optional[int]:
        return None

    def derivative_coefficients(self) -> Optional[np.ndarray]:
        return None


@dataclass(frozen=True)
class PolyCos:
    """Polynomial plus amplitude*cos(x).

    ``coeffs`` are ascending monomial coefficients of the polynomial part.
    """

    coeffs: tuple[float, ...]
    amplitude: float = 0.0

    @cached_property
    def _dp(self) -> np.ndarray:
        return npoly.polyder(np.asarray(self.coeffs, dtype=float))

    @cached_property
    def _dp2(self) -> np.ndarray:
        return npoly.polyder(np.asarray(self.coeffs, dtype=float), 2)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return npoly.polyval(x, self.coeffs) + self.amplitude * np.cos(x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return npoly.polyval(x, self._dp) - self.amplitude * np.sin(x)

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        return npoly.polyval(x, self._dp2) - self.amplitude * np.cos(x)

    @property
    def degree(self) -> Optional[int]:
        return None

    def derivative_coefficients(self) -> Optional[np.ndarray]:
        return None


@dataclass(frozen=True)
class Polynomial:
    """Arbitrary polynomial; ``coeffs`` are ascending monomial coefficients."""

    coeffs: tuple[float, ...]

    @cached_property
    def _dp(self) -> np.ndarray:
        dp = npoly.polyder(np.asarray(self.coeffs, dtype=float))
        return dp if dp.size else np.array([0.0])

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return npoly.polyval(x, self.coeffs)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return npoly.polyval(x, self._dp)

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        dp2 = npoly.polyder(np.asarray(self.coeffs, dtype=float), 2)
        return npoly.polyval(x, dp2) if dp2.size else np.zeros_like(x)

    @property
    def degree(self) -> Optional[int]:
        return _trimmed_degree(self.coeffs)

    def derivative_coefficients(self) -> Optional[np.ndarray]:
        return self._dp


@dataclass(frozen=True)
class Zero:
    """Identically zero potential (no confinement / no interaction)."""

    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def derivative(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def second_derivative(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def degree(self) -> Optional[int]:
        return 0

    def derivative_coefficients(self) -> Optional[np.ndarray]:
        return np.array([0.0])


PotentialSpec = Union[
    Quadratic, Bistable, Cosh, MorseLike, GaussianWell, PolyCos, Polynomial, Zero
]

_FAMILY_TAGS = {
    Quadratic: "quadratic",
    Bistable: "bistable",
    Cosh: "cosh",
    MorseLike: "morse_like",
    GaussianWell: "gaussian_well",
    PolyCos: "poly_cos",
    Polynomial: "polynomial",
    Zero: "zero",
}


def potential_to_dict(p: PotentialSpec) -> dict:
    d = {"family": _FAMILY_TAGS[type(p)]}
    if isinstance(p, Quadratic):
        d["a"] = p.a
    elif isinstance(p, MorseLike):
        d.update(D=p.D, a=p.a, r=p.r)
    elif isinstance(p, GaussianWell):
        d["A"] = p.A
    elif isinstance(p, PolyCos):
        d.update(coeffs=list(p.coeffs), amplitude=p.amplitude)
    elif isinstance(p, Polynomial):
        d["coeffs"] = list(p.coeffs)
    return d


def potential_from_dict(d: dict) -> PotentialSpec:
    d = dict(d)
    family = d.pop("family", None)
    builders = {
        "quadratic": lambda: Quadratic(a=float(d.pop("a", 1.0))),
        "bistable": Bistable,
        "cosh": Cosh,
        "morse_like": lambda: MorseLike(
            D=float(d.pop("D", 5.0)), a=float(d.pop("a", 0.5)), r=float(d.pop("r", 1.0))
        ),
        "gaussian_well": lambda: GaussianWell(A=float(d.pop("A", 5.0))),
        "poly_cos": lambda: PolyCos(
            coeffs=tuple(float(c) for c in d.pop("coeffs")),
            amplitude=float(d.pop("amplitude", 0.0)),
        ),
        "polynomial": lambda: Polynomial(
            coeffs=tuple(float(c) for c in d.pop("coeffs"))
        ),
        "zero": Zero,
    }
    if family not in builders:
        raise ValueError(f"unknown potential family: {family!r}")
    p = builders[family]()
    if d:
        raise ValueError(f"unknown potential keys: {sorted(d)}")
    return p
