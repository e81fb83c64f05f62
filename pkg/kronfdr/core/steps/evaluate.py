from kronfdr.core.context import ReplicationContext
from kronfdr.core.steps.base import PipelineStep
from kronfdr.core.steps.registry import StepRegistry
from kronfdr.models.matrices import Axis
from kronfdr.services.fdr import joint_metrics, kron_support


class EvaluateStep(PipelineStep):
    """Joint metrics; scored against the generating model when the context has one."""

    @property
    def name(self) -> str:
        return "evaluate"

    def execute(self, ctx: ReplicationContext, params: dict):
        supports = ctx.require("supports")
        model = ctx.get("model")
        truth = (model.omega, model.gamma) if model is not None else None
        omega_est, gamma_est = supports[Axis.OMEGA], supports[Axis.GAMMA]

        ctx.set("metrics", joint_metrics(omega_est, gamma_est, ctx.require("alpha"), truth=truth))
        ctx.set("kron_support", kron_support(omega_est, gamma_est, materialize=bool((params or {}).get("materialize"))))


StepRegistry.register(EvaluateStep())
