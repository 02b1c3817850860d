# Results Server Package
from .data_store import ReportStore
from .server import create_app, serve
from .tools import ResultTools

__all__ = ['ReportStore', 'ResultTools', 'create_app', 'serve']
