"""
Results Server - FastAPI Application
Read-only HTTP access to benchmark metadata, oracles and stored solver runs
"""
import logging
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
import uvicorn

from gpp.config import Settings

from .data_store import ReportStore
from .tools import NOT_FOUND, ResultTools, get_tool_definitions

logger = logging.getLogger(__name__)

VERSION = "0.1.0"


def _unwrap(result: Dict) -> Dict:
    if result.get("success"):
        return result
    status = 404 if result.get("error_type") == NOT_FOUND else 422
    raise HTTPException(status_code=status, detail=result.get("error"))


def create_app(store: Optional[ReportStore] = None) -> FastAPI:
    if store is None:
        store = ReportStore(str(Settings.from_env().output_dir))
    tools = ResultTools(store)

    app = FastAPI(
        title="Particle Gradient Projection Results Server",
        description="Benchmark problems, oracle values and stored solver runs",
        version=VERSION,
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.tools = tools

    @app.get("/")
    async def root():
        """Health check and API info"""
        return {
            "service": "Particle Gradient Projection Results Server",
            "status": "running",
            "version": VERSION,
            "endpoints": {
                "problems": "/problems",
                "problem": "/problems/{problem_id}",
                "oracle": "/oracle/{problem_id}/{query}?args=...",
                "runs": "/runs",
                "run": "/runs/{run_id}",
            },
            "tools": get_tool_definitions(),
        }

    @app.get("/problems")
    async def list_problems():
        try:
            return _unwrap(tools.list_problems())
        except HTTPException:
            raise
        except Exception as e:
            raise HTTPException(status_code=500, detail=str(e))

    @app.get("/problems/{problem_id}")
    async def get_problem(problem_id: str):
        try:
            return _unwrap(tools.problem_details(problem_id))
        except HTTPException:
            raise
        except Exception as e:
            raise HTTPException(status_code=500, detail=str(e))

    @app.get("/oracle/{problem_id}/{query}")
    async def query_oracle(problem_id: str, query: str, args: List[str] = Query(default=[]),
                           case_id: Optional[str] = None, n_mc: int = Query(default=100_000, ge=2),
                           seed: int = Query(default=0, ge=0)):
        try:
            return _unwrap(tools.oracle(problem_id, query, args, case_id=case_id, n_mc=n_mc, seed=seed))
        except HTTPException:
            raise
        except Exception as e:
            raise HTTPException(status_code=500, detail=str(e))

    @app.get("/runs")
    async def list_runs():
        try:
            return _unwrap(tools.list_runs())
        except HTTPException:
            raise
        except Exception as e:
            raise HTTPException(status_code=500, detail=str(e))

    @app.get("/runs/{run_id}")
    async def get_run(run_id: str):
        try:
            return _unwrap(tools.run_summary(run_id))
        except HTTPException:
            raise
        except Exception as e:
            raise HTTPException(status_code=500, detail=str(e))

    return app


def serve(host: Optional[str] = None, port: Optional[int] = None, store: Optional[ReportStore] = None):
    settings = Settings.from_env()
    host = host or settings.api_host
    port = port or settings.api_port
    logger.info(f"Starting results server on http://{host}:{port} (docs at /docs)")
    uvicorn.run(create_app(store), host=host, port=port, log_level="info")


if __name__ == "__main__":
    serve()
