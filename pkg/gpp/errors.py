"""
Solver Errors
Exception types shared by the solver, the benchmarks and the entry points
"""
from typing import Optional


class GppError(Exception):
    """Base class for every error raised by this project"""


class ConfigError(GppError):
    """Invalid experiment file, run config or problem parameters (CLI exit 2)"""


class UnknownProblemError(ConfigError):
    """Problem id not present in the registry"""

    def __init__(self, problem_id: str):
        super().__init__(f"unknown problem: {problem_id}")
        self.problem_id = problem_id


class DuplicateProblemError(GppError):
    """Registering a problem id twice"""


class DimensionError(GppError, ValueError):
    """Array shape does not match the declared problem or model dimensions"""


class IllConditionedFitError(GppError):
    """Normal equations are singular and no ridge term was supplied"""

    def __init__(self, message: str = "ill-conditioned fit; supply ridge > 0"):
        super().__init__(message)


class OracleUnavailableError(GppError):
    """The problem has no analytic oracle for the requested quantity"""


class PolicyFormatError(GppError):
    """Policy file is malformed, has an unknown version or cannot be serialised"""


class NumericalAbort(GppError):
    """Non-finite values appeared during an epoch (CLI exit 3)"""

    def __init__(self, stage: str, step: int, detail: str = "", epoch: Optional[int] = None):
        self.stage = stage
        self.step = step
        self.detail = detail
        self.epoch = epoch
        super().__init__(self._message())

    def _message(self) -> str:
        where = f"{self.stage} pass, step {self.step}"
        if self.epoch is not None:
            where = f"epoch {self.epoch}, {where}"
        return f"non-finite values in {where}" + (f": {self.detail}" if self.detail else "")

    def at_epoch(self, epoch: int) -> "NumericalAbort":
        return NumericalAbort(self.stage, self.step, self.detail, epoch=epoch)
