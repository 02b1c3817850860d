"""
Result Tools
Exposes benchmark metadata, oracle queries and stored runs as dictionary-returning tools
"""
import logging
from typing import Dict, List, Optional

import benchmarks
from gpp.errors import ConfigError, GppError, OracleUnavailableError, UnknownProblemError

from .data_store import ReportStore

logger = logging.getLogger(__name__)

NOT_FOUND = "not_found"
BAD_REQUEST = "bad_request"


def _failure(error: Exception, kind: str, **extra) -> Dict:
    return {"success": False, "error": str(error), "error_type": kind, **extra}


class ResultTools:
    """Tools over the problem registry and a ReportStore"""

    def __init__(self, store: ReportStore):
        self.store = store
        logger.info("Result tools initialized")

    def list_problems(self) -> Dict:
        """
        Tool: problems.list
        Returns every registered benchmark with its description and oracle queries
        """
        logger.info("Tool called: list_problems()")
        problems = [{"problem_id": e.problem_id, "description": e.description,
                     "oracle_queries": list(e.oracle_queries)} for e in benchmarks.registry().list()]
        return {"success": True, "total_problems": len(problems), "problems": problems}

    def problem_details(self, problem_id: str) -> Dict:
        """
        Tool: problems.get
        Parameters, default run configuration and published reference values of one problem
        """
        logger.info(f"Tool called: problem_details(problem_id={problem_id})")
        try:
            entry = benchmarks.registry().get(problem_id)
        except UnknownProblemError as e:
            return _failure(e, NOT_FOUND, problem_id=problem_id)
        return {"success": True, "problem": entry.describe()}

    def oracle(self, problem_id: str, query: str, args: Optional[List[str]] = None,
               params: Optional[Dict] = None, case_id: Optional[str] = None,
               n_mc: int = benchmarks.DEFAULT_ORACLE_SAMPLES, seed: int = 0) -> Dict:
        """
        Tool: oracle.query
        Evaluates an analytic or Monte-Carlo oracle, e.g. oracle("lq100", "p_t", ["1.0"])
        """
        logger.info(f"Tool called: oracle(problem_id={problem_id}, query={query}, args={args})")
        try:
            result = benchmarks.query_oracle(problem_id, query, args or [], params=params,
                                             case_id=case_id, n_mc=n_mc, seed=seed)
        except UnknownProblemError as e:
            return _failure(e, NOT_FOUND, problem_id=problem_id)
        except (ConfigError, OracleUnavailableError) as e:
            return _failure(e, BAD_REQUEST, problem_id=problem_id)
        return {"success": True, "result": result}

    def list_runs(self) -> Dict:
        """
        Tool: runs.list
        Summary lines of every stored run
        """
        logger.info("Tool called: list_runs()")
        runs = self.store.list_runs()
        return {"success": True, "total_runs": len(runs), "runs": runs}

    def run_summary(self, run_id: str) -> Dict:
        """
        Tool: runs.get
        Per-epoch metrics and the summary block of one stored run
        """
        logger.info(f"Tool called: run_summary(run_id={run_id})")
        try:
            report = self.store.load_report(run_id)
        except (GppError, ValueError) as e:
            return _failure(e, BAD_REQUEST, run_id=run_id)
        if report is None:
            return _failure(FileNotFoundError(f"run not found: {run_id}"), NOT_FOUND, run_id=run_id)
        return {"success": True, **report}


def get_tool_definitions() -> List[Dict]:
    """Tool definitions served at GET / for discovery"""
    return [
        {"name": "problems.list", "description": "Lists the registered benchmark problems.",
         "parameters": {"type": "object", "properties": {}, "required": []}},
        {"name": "problems.get",
         "description": "Returns parameters, default run configuration and reference values of a problem.",
         "parameters": {"type": "object",
                        "properties": {"problem_id": {"type": "string", "description": "e.g. 'interbank'"}},
                        "required": ["problem_id"]}},
        {"name": "oracle.query",
         "description": "Evaluates a benchmark oracle such as a Riccati coefficient or an exact value.",
         "parameters": {"type": "object",
                        "properties": {"problem_id": {"type": "string"},
                                       "query": {"type": "string", "description": "e.g. 'p_t', 'value'"},
                                       "args": {"type": "array", "items": {"type": "string"}}},
                        "required": ["problem_id", "query"]}},
        {"name": "runs.list", "description": "Lists stored solver runs with their summary lines.",
         "parameters": {"type": "object", "properties": {}, "required": []}},
        {"name": "runs.get", "description": "Returns the per-epoch metrics of a stored run.",
         "parameters": {"type": "object", "properties": {"run_id": {"type": "string"}},
                        "required": ["run_id"]}},
    ]
