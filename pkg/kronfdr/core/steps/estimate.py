from loguru import logger

from kronfdr.core.context import ReplicationContext
from kronfdr.core.steps.base import PipelineStep
from kronfdr.core.steps.registry import StepRegistry
from kronfdr.models.matrices import Axis
from kronfdr.models.schemas import LassoConfig, TuningGrid
from kronfdr.services.tuning import tune


class EstimateStep(PipelineStep):
    """
    Tune (lambda, delta) and build the test matrix on each axis.

    The gamma axis yields the q x q statistics, the omega axis the p x p ones.
    """

    @property
    def name(self) -> str:
        return "estimate"

    def execute(self, ctx: ReplicationContext, params: dict):
        dataset = ctx.require("dataset")
        grid = ctx.option(params, "tuning_grid", TuningGrid())
        lasso = ctx.option(params, "lasso", LassoConfig())

        tuning, statistics = {}, {}
        for axis in (Axis.GAMMA, Axis.OMEGA):
            result = tune(dataset, grid, lasso, axis=axis)
            tuning[axis] = result
            statistics[axis] = result.statistics
        ctx.set("tuning", tuning)
        ctx.set("statistics", statistics)
        logger.debug(
            f"[rep {ctx.replication}] tuned gamma=({tuning[Axis.GAMMA].lambda_hat}, {tuning[Axis.GAMMA].delta_hat}), "
            f"omega=({tuning[Axis.OMEGA].lambda_hat}, {tuning[Axis.OMEGA].delta_hat})"
        )


StepRegistry.register(EstimateStep())
