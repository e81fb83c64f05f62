import time
from typing import List, Optional

from loguru import logger

from kronfdr.core.context import ReplicationContext
from kronfdr.core.steps import StepRegistry

SIMULATION_STEPS: List[str] = ["generate", "sample", "estimate", "select", "evaluate"]
DATA_STEPS: List[str] = ["estimate", "select", "evaluate"]


class PipelineRunner:
    """Runs named steps in order over one context, recording a timing trace."""

    def run(self, steps: List[str], ctx: Optional[ReplicationContext] = None, params: Optional[dict] = None) -> ReplicationContext:
        ctx = ctx if ctx is not None else ReplicationContext()
        params = params or {}
        logger.debug(f"[rep {ctx.replication}] starting pipeline with {len(steps)} steps")

        for i, step_name in enumerate(steps):
            logger.debug(f"[rep {ctx.replication}] executing step {i + 1}: {step_name}")
            start_time = time.perf_counter()
            status = "success"
            error_msg = None
            try:
                step_instance = StepRegistry.get_step(step_name)
                step_instance.execute(ctx, params.get(step_name, {}))
                ctx.history.append(step_name)
            except Exception as step_err:
                status = "failed"
                error_msg = str(step_err)
                logger.error(f"[rep {ctx.replication}] pipeline failed at step {step_name} (seed={ctx.seed}): {step_err}")
                raise
            finally:
                ctx.add_trace(step_name, time.perf_counter() - start_time, status, error_msg)

        return ctx
