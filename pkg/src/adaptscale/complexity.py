"""Renyi entropy of CI probability distributions.

h_alpha = 1/(1-alpha) * ln(sum_i p_i^alpha), natural log (nats).  Zero
entries are skipped (0^alpha := 0).  Sums run over descending
probabilities with exact compensated accumulation (math.fsum), which
matters at small alpha where the distribution tail dominates.

ALPHA_STAR = 0.25 is the calibrated default order for the h* convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ALPHA_STAR = 0.25

DEFAULT_PROBABILITY_FLOOR = 1e-16
HARTLEY_FLOOR_SCAN = (1e-16, 1e-12, 1e-8)


class UseLimitVariant(ValueError):
    """alpha outside (0,1)U(1,inf); use renyi_limits for the named cases."""


@dataclass(frozen=True)
class RenyiResult:
    order: object  # float, or one of "hartley", "shannon", "collision", "min"
    value: float


@dataclass(frozen=True)
class RenyiLimits:
    hartley: float
    shannon: float
    collision: float
    min_entropy: float
    floor: float
    # h0 is fragile under the probability floor; report the scan alongside
    hartley_by_floor: dict = field(default_factory=dict)

    def as_map(self):
        return {
            "hartley": self.hartley,
            "shannon": self.shannon,
            "collision": self.collision,
            "min": self.min_entropy,
        }


def _descending_nonzero(d):
    p = np.asarray(d.probabilities, dtype=float)
    p = p[p > 0.0]
    return np.sort(p)[::-1]


def renyi_entropy(d, alpha: float) -> RenyiResult:
    """Renyi entropy of order alpha (alpha > 0, alpha != 1)."""
    if alpha <= 0.0 or alpha == 1.0:
        raise UseLimitVariant(
            f"alpha={alpha} is a limit case; use renyi_limits instead"
        )
    p = _descending_nonzero(d)
    total = float(np.sum(p))
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {total}, not 1")
    s = math.fsum(float(x) ** alpha for x in p)
    return RenyiResult(alpha, math.log(s) / (1.0 - alpha))


def renyi_limits(d, floor: float = DEFAULT_PROBABILITY_FLOOR) -> RenyiLimits:
    """The named limits: Hartley (a->0), Shannon (a->1), collision (a=2),
    min-entropy (a->inf).  Hartley counts p_i > floor and is additionally
    reported at several floors so its fragility is visible."""
    p = _descending_nonzero(d)
    shannon = -math.fsum(float(x) * math.log(float(x)) for x in p)
    collision = -math.log(math.fsum(float(x) ** 2 for x in p))
    min_entropy = -math.log(float(p[0]))
    scan = {f: math.log(int(np.sum(p > f))) for f in HARTLEY_FLOOR_SCAN}
    return RenyiLimits(
        hartley=math.log(int(np.sum(p > floor))),
        shannon=shannon,
        collision=collision,
        min_entropy=min_entropy,
        floor=floor,
        hartley_by_floor=scan,
    )


def renyi_curve(d, alpha_grid) -> list:
    """Pointwise h_alpha over a grid; non-increasing in alpha."""
    return [renyi_entropy(d, float(a)) for a in alpha_grid]


def renyi_value(d, alpha: float, floor: float = DEFAULT_PROBABILITY_FLOOR) -> float:
    """h_alpha with the limit cases folded in (alpha = 0, 1, or inf)."""
    if alpha == 1.0:
        return renyi_limits(d, floor).shannon
    if alpha == 0.0:
        return renyi_limits(d, floor).hartley
    if math.isinf(alpha):
        return renyi_limits(d, floor).min_entropy
    return renyi_entropy(d, alpha).value
