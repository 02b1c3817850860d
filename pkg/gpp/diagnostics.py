"""
Divergence Monitor
Flags unusual epochs of a projected-gradient run without altering it
"""
from typing import Dict, List, Optional
import logging
import math

import numpy as np

from .problem import PolicySequence
from .randfeatures import RandomFeatureModel

logger = logging.getLogger(__name__)


class DivergenceMonitor:
    """Checks each epoch's cost and fitted coefficients against fixed thresholds"""

    THRESHOLDS = {
        "max_cost_jump_ratio": 10.0,  # |J_k - J_{k-1}| relative to |J_{k-1}|
        "cost_floor": 1e-12,  # below this the jump ratio is not computed
        "max_saturated_fraction": 0.5,  # share of theta entries sitting at the clip bound
        "max_theta_norm": 1e6,
    }

    def __init__(self):
        self.previous_cost: Optional[float] = None

    def check_epoch(self, epoch: int, cost: float, policy: PolicySequence) -> List[Dict]:
        """
        Returns a list of dicts with:
        - check: name of the failed check
        - severity: medium or high
        - description: human-readable description
        """
        flags = []

        if not math.isfinite(cost):
            flags.append({
                "check": "non_finite_cost",
                "severity": "high",
                "description": f"Epoch {epoch} cost estimate is {cost}",
            })
        elif self.previous_cost is not None and abs(self.previous_cost) > self.THRESHOLDS["cost_floor"]:
            ratio = abs(cost - self.previous_cost) / abs(self.previous_cost)
            if ratio > self.THRESHOLDS["max_cost_jump_ratio"]:
                flags.append({
                    "check": "cost_jump",
                    "severity": "medium",
                    "description": f"Epoch {epoch} cost moved by {ratio:.1f}x the previous value",
                })

        models = [c for c in policy.controllers if isinstance(c, RandomFeatureModel)]
        if models:
            theta_norm = max(float(np.linalg.norm(m.theta)) for m in models)
            if theta_norm > self.THRESHOLDS["max_theta_norm"]:
                flags.append({
                    "check": "theta_norm",
                    "severity": "high",
                    "description": f"Epoch {epoch} largest coefficient norm is {theta_norm:.3e}",
                })

            bound = models[0].clip_bound
            if math.isfinite(bound):
                saturated = np.mean([np.mean(np.abs(m.theta) >= bound) for m in models])
                if saturated > self.THRESHOLDS["max_saturated_fraction"]:
                    flags.append({
                        "check": "clip_saturation",
                        "severity": "medium",
                        "description": f"Epoch {epoch}: {saturated:.0%} of coefficients sit at the clip bound {bound}",
                    })

        if math.isfinite(cost):
            self.previous_cost = cost
        for flag in flags:
            logger.warning(flag["description"])
        return flags
