"""Leslie viscosity coefficients and their admissibility conditions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

DEFAULT_PARODI_TOL = 1e-12
DEFAULT_COND_TOL = 1e-12
# weights below this are admissible but leave an alignment mode nearly undamped
WEAK_WEIGHT_WARN = 1e-10


class CoefficientError(ValueError):
    """Raised for coefficient sets that cannot be used at all."""


def derive_lambdas(mu2: float, mu3: float, mu5: float, mu6: float) -> tuple[float, float]:
    """Return ``(lambda1, lambda2) = (mu2 - mu3, mu5 - mu6)``."""
    for name, v in (("mu2", mu2), ("mu3", mu3), ("mu5", mu5), ("mu6", mu6)):
        if not math.isfinite(v):
            raise CoefficientError(f"{name} must be finite, got {v!r}")
    return mu2 - mu3, mu5 - mu6


@dataclass(frozen=True)
class LeslieCoefficients:
    """The six Leslie viscosities, nondimensional.

    ``lambda1`` and ``lambda2`` are derived on access and never stored.
    """

    mu1: float
    mu2: float
    mu3: float
    mu4: float
    mu5: float
    mu6: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "mu3", "mu4", "mu5", "mu6"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise CoefficientError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_sequence(cls, mus) -> "LeslieCoefficients":
        mus = tuple(mus)
        if len(mus) != 6:
            raise CoefficientError(f"expected 6 coefficients, got {len(mus)}")
        return cls(*mus)

    def as_tuple(self) -> tuple[float, ...]:
        return (self.mu1, self.mu2, self.mu3, self.mu4, self.mu5, self.mu6)

    @property
    def lambda1(self) -> float:
        return self.mu2 - self.mu3

    @property
    def lambda2(self) -> float:
        return self.mu5 - self.mu6

    def _require_lambda1(self):
        if not self.lambda1 < 0:
            raise CoefficientError(f"lambda1 = mu2 - mu3 must be negative, got {self.lambda1}")

    @property
    def alignment_weight_1(self) -> float:
        """``mu1 - lambda2**2 / lambda1``, weight of ``|A : d d|^2`` in the dissipation."""
        self._require_lambda1()
        return self.mu1 - self.lambda2**2 / self.lambda1

    @property
    def alignment_weight_2(self) -> float:
        """``mu5 + mu6 + lambda2**2 / lambda1``, weight of ``|A d|^2`` in the dissipation."""
        self._require_lambda1()
        return self.mu5 + self.mu6 + self.lambda2**2 / self.lambda1

    @property
    def gamma(self) -> float:
        """Director relaxation rate ``1 / |lambda1|``."""
        self._require_lambda1()
        return 1.0 / abs(self.lambda1)

    @property
    def ratio(self) -> float:
        """``lambda2 / lambda1``."""
        self._require_lambda1()
        return self.lambda2 / self.lambda1


@dataclass
class ValidationReport:
    parodi_ok: bool
    lambda1_negative: bool
    alignment_nonneg: bool
    viscosity_positive: bool
    stretching_ok: bool
    messages: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return (self.parodi_ok and self.lambda1_negative and self.alignment_nonneg
                and self.viscosity_positive and self.stretching_ok)

    def __bool__(self) -> bool:
        return self.valid


def validate(coeffs: LeslieCoefficients, parodi_tol: float = DEFAULT_PARODI_TOL,
             cond_tol: float = DEFAULT_COND_TOL) -> ValidationReport:
    """Check Parodi's relation and the four dissipation conditions.

    Never raises for an inadmissible set; the returned report carries one
    flag per condition and a message for each violation.
    """
    c = coeffs
    lam1, lam2 = derive_lambdas(c.mu2, c.mu3, c.mu5, c.mu6)
    messages = []

    parodi_gap = (c.mu2 + c.mu3) - (c.mu6 - c.mu5)
    parodi_ok = abs(parodi_gap) <= parodi_tol
    if not parodi_ok:
        messages.append(
            f"Parodi relation mu2 + mu3 = mu6 - mu5 violated: "
            f"{c.mu2 + c.mu3:g} != {c.mu6 - c.mu5:g}")

    lambda1_negative = lam1 < 0
    if not lambda1_negative:
        messages.append(f"lambda1 = mu2 - mu3 = {lam1:g} must be < 0")

    viscosity_positive = c.mu4 > 0
    if not viscosity_positive:
        messages.append(f"mu4 = {c.mu4:g} violates mu4 > 0")

    if lambda1_negative:
        q = lam2**2 / lam1
        w1 = c.mu1 - q
        w2 = c.mu5 + c.mu6 + q
        alignment_nonneg = w1 >= -cond_tol
        stretching_ok = w2 >= -cond_tol
        if not alignment_nonneg:
            messages.append(f"mu1 - lambda2^2/lambda1 = {w1:g} must be >= 0")
        if not stretching_ok:
            messages.append(f"mu5 + mu6 = {c.mu5 + c.mu6:g} must be >= "
                            f"-lambda2^2/lambda1 = {-q:g}")
        for name, w, ok in (("mu1 - lambda2^2/lambda1", w1, alignment_nonneg),
                            ("mu5 + mu6 + lambda2^2/lambda1", w2, stretching_ok)):
            if ok and w < WEAK_WEIGHT_WARN:
                logger.warning("%s = %g: alignment mode is (nearly) undamped", name, w)
    else:
        # both conditions divide by lambda1
        alignment_nonneg = stretching_ok = False
        messages.append("alignment conditions undefined without lambda1 < 0")

    return ValidationReport(parodi_ok, lambda1_negative, alignment_nonneg,
                            viscosity_positive, stretching_ok, messages)
