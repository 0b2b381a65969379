from typing import Callable

from fastapi import Request, Response
from starlette.middleware.base import BaseHTTPMiddleware

from netgof.core.context import new_run_id


class RunIDMiddleware(BaseHTTPMiddleware):
    """
    Assign a run identifier to every incoming HTTP request.

    The id is stored on `request.state.run_id`, set in the logging context so every log line
    of the request (and of background experiments it schedules) carries it, and echoed back
    in the `X-Run-ID` response header. Simulation results are written under a directory
    named after it.
    """
    async def dispatch(self, request: Request, call_next: Callable) -> Response:
        run_id = new_run_id()
        request.state.run_id = run_id

        response = await call_next(request)
        response.headers["X-Run-ID"] = run_id
        return response
