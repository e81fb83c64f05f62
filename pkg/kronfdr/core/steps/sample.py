from kronfdr.core.context import ReplicationContext
from kronfdr.core.steps.base import PipelineStep
from kronfdr.core.steps.registry import StepRegistry
from kronfdr.services.sampler import sample_dataset


class SampleStep(PipelineStep):
    @property
    def name(self) -> str:
        return "sample"

    def execute(self, ctx: ReplicationContext, params: dict):
        model = ctx.require("model")
        n = ctx.option(params, "n")
        if n is None:
            raise ValueError("Sample step requires 'n'")
        ctx.set("dataset", sample_dataset(model, n, seed=ctx.seeds.get("sample", ctx.seed)))


StepRegistry.register(SampleStep())
