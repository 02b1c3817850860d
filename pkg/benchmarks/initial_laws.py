"""
Initial Laws
Initial distributions shared by the benchmark problems, including the six case laws
"""
import math
from typing import Dict, Sequence

import numpy as np

from gpp.errors import ConfigError
from gpp.problem import InitialLaw


def constant(x0: Sequence[float]) -> InitialLaw:
    x0 = np.asarray(x0, dtype=float)
    return InitialLaw(lambda gen, rows: np.tile(x0, (rows, 1)), name=f"constant({x0[0]:g})",
                      mean=float(x0[0]), variance=0.0)


def normal(mean: float, variance: float, d: int = 1) -> InitialLaw:
    std = math.sqrt(variance)
    return InitialLaw(lambda gen, rows: mean + std * gen.standard_normal((rows, d)),
                      name=f"normal({mean:g}, {variance:g})", mean=mean, variance=variance)


def mixture(means: Sequence[float], stds: Sequence[float], name: str) -> InitialLaw:
    """Equal-weight scalar Gaussian mixture"""
    means = np.asarray(means, dtype=float)
    stds = np.asarray(stds, dtype=float)
    k = len(means)

    def draw(gen, rows):
        pick = np.minimum((gen.random(rows) * k).astype(int), k - 1)
        noise = gen.standard_normal(rows)
        return (means[pick] + stds[pick] * noise)[:, None]

    mean = float(means.mean())
    variance = float(np.mean(stds**2 + means**2) - mean**2)
    return InitialLaw(draw, name=name, mean=mean, variance=variance)


def three_point_plus_noise(a: float, k: float, theta: float) -> InitialLaw:
    """a + (-k 1{5U<2} + k 1{5U>3}) + theta Y, U uniform, Y standard normal"""

    def draw(gen, rows):
        u = gen.random(rows)
        y = gen.standard_normal(rows)
        jump = np.where(5 * u < 2, -k, 0.0) + np.where(5 * u > 3, k, 0.0)
        return (a + jump + theta * y)[:, None]

    variance = 0.8 * k**2 + theta**2
    return InitialLaw(draw, name=f"three_point({a:g}, {k:g}, {theta:g})", mean=a, variance=variance)


def case_law(case_id: str) -> InitialLaw:
    builders = {
        "case1": lambda: normal(0.1, 0.04),
        "case2": lambda: normal(0.2, 0.025**2),
        "case3": lambda: normal(0.3, 0.025**2),
        "case4": lambda: mixture([-math.sqrt(3) / 10 + 0.1] * 2, [0.1, 0.1], "case4"),
        "case5": lambda: mixture([-0.1 + 0.05] * 2, [0.1, 0.1], "case5"),
        "case6": lambda: three_point_plus_noise(0.2, 0.3, 0.07),
    }
    if case_id not in builders:
        raise ConfigError(f"unknown case '{case_id}', expected one of {sorted(builders)}")
    law = builders[case_id]()
    law.name = case_id
    return law


CASE_IDS = tuple(f"case{i}" for i in range(1, 7))


def describe_cases() -> Dict[str, Dict[str, float]]:
    return {cid: {"mean": case_law(cid).mean, "variance": case_law(cid).variance} for cid in CASE_IDS}
