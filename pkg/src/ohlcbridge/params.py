"""Parameter containers: model scale, series truncation, quadrature budgets."""

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Scale of the underlying Brownian model.

    ``sigma`` is the standard deviation of the terminal value B(1).  Every
    law in the package is parameterized by sigma; the interior scale
    sigma_t = sigma * sqrt(t(1-t)) shows up so often that it gets helpers.
    """

    sigma: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma!r}")

    @property
    def sigma_sq(self):
        return self.sigma * self.sigma

    def sigma_t(self, t):
        return self.sigma * math.sqrt(t * (1.0 - t))

    def sigma_t_sq(self, t):
        return self.sigma_sq * t * (1.0 - t)

    @classmethod
    def from_sigma_sq(cls, sigma_sq):
        if not (math.isfinite(sigma_sq) and sigma_sq > 0):
            raise DomainError(f"sigma_sq must be positive and finite, got {sigma_sq!r}")
        return cls(sigma=math.sqrt(sigma_sq))


@dataclass(frozen=True)
class SeriesControl:
    """Truncation budget for the reflection/range series.

    Summation stops once two consecutive term groups fall below
    ``tail_tolerance * (1 + |partial sum|)``; exhausting ``max_terms``
    first raises :class:`~ohlcbridge.errors.TruncationError`.
    """

    max_terms: int = 1000
    tail_tolerance: float = 1e-12

    def __post_init__(self):
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if not (math.isfinite(self.tail_tolerance) and self.tail_tolerance > 0):
            raise DomainError("tail_tolerance must be positive and finite")


@dataclass(frozen=True)
class QuadratureControl:
    """Budget for the numeric-integration routes.

    ``abs_tolerance``/``rel_tolerance`` drive the adaptive (scipy) paths;
    ``panels`` and ``nodes`` size the composite Gauss-Legendre rule used on
    finite intervals, where the integrands are smooth and a fixed rule is
    both faster and deterministic.
    """

    abs_tolerance: float = 1e-11
    rel_tolerance: float = 1e-9
    panels: int = 8
    nodes: int = 40

    def __post_init__(self):
        if self.abs_tolerance <= 0 or self.rel_tolerance <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.panels < 1 or self.nodes < 2:
            raise DomainError("need at least 1 panel and 2 nodes")


DEFAULT_SERIES = SeriesControl()
DEFAULT_QUADRATURE = QuadratureControl()
