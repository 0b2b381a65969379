from contextvars import ContextVar

import shortuuid


run_id_ctx: ContextVar[str] = ContextVar("run_id", default="-")


def new_run_id() -> str:
    """Generate a run id and make it the current one for log correlation."""
    run_id = shortuuid.uuid()
    run_id_ctx.set(run_id)
    return run_id
