"""
Shared fixtures: small benchmark instances, run configs and a temporary report store
"""
from pathlib import Path
import sys

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from benchmarks.interbank import InterbankParams, InterbankProblem  # noqa: E402
from benchmarks.lq import LqParams, LqProblem  # noqa: E402
from gpp.config import LearningSchedule, RunConfig  # noqa: E402
from gpp.problem import PolicySequence  # noqa: E402
from gpp.solver import feature_maps_for  # noqa: E402
from results_server.data_store import ReportStore  # noqa: E402


@pytest.fixture
def lq1d():
    return LqProblem(LqParams(d=1, x0_value=0.5), T=1.0)


@pytest.fixture
def interbank():
    return InterbankProblem(InterbankParams(), T=1.0)


@pytest.fixture
def lq1d_config():
    return RunConfig(problem_id="lq100", M=400, N=4, K=3, T=1.0, hidden_size=8,
                     schedule=LearningSchedule(rho0=0.4), seed=11,
                     problem_params={"d": 1, "x0_value": 0.5})


@pytest.fixture
def zero_policy():
    def make(problem, config):
        times = np.arange(config.N) * config.dt
        return PolicySequence.zeros(feature_maps_for(problem, config), problem.d1, times,
                                    problem.control_input_dims)
    return make


@pytest.fixture
def store(tmp_path):
    return ReportStore(str(tmp_path / "runs"))
