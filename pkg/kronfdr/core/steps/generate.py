from loguru import logger

from kronfdr.core.context import ReplicationContext
from kronfdr.core.steps.base import PipelineStep
from kronfdr.core.steps.registry import StepRegistry
from kronfdr.services.graphs import gen_precision
from kronfdr.services.sampler import build_model


class GenerateStep(PipelineStep):
    """Draw Omega and Gamma for this replication and assemble the model."""

    @property
    def name(self) -> str:
        return "generate"

    def execute(self, ctx: ReplicationContext, params: dict):
        p, q = ctx.option(params, "p"), ctx.option(params, "q")
        if p is None or q is None:
            raise ValueError("Generate step requires 'p' and 'q'")
        omega = gen_precision(ctx.option(params, "omega_kind"), p, seed=ctx.seeds.get("omega", ctx.seed))
        gamma = gen_precision(ctx.option(params, "gamma_kind"), q, seed=ctx.seeds.get("gamma", ctx.seed))
        model = build_model(omega, gamma, nu=ctx.option(params, "nu", 0.0))
        ctx.set("model", model)
        logger.debug(f"[rep {ctx.replication}] model p={p}, q={q}, nu={model.nu}")


StepRegistry.register(GenerateStep())
