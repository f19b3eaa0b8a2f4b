"""FastAPI service wrapping the paclab library.

Every operation is a pure request/response computation, so the service is
stateless: the same JSON request always yields the same JSON response.  The
command-line interface is a thin client of this app (in-process by default).
"""

from .app import app

__all__ = ["app"]
