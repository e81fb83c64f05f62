from kronfdr.core.context import ReplicationContext
from kronfdr.core.steps.base import PipelineStep
from kronfdr.core.steps.registry import StepRegistry
from kronfdr.models.matrices import Axis
from kronfdr.services.fdr import bh_select, choose_alpha_for_target, p_values, support_estimate


class SelectStep(PipelineStep):
    """
    BH selection on both axes at a per-axis alpha.

    With ``target_alpha_prime`` set (and no explicit ``alpha`` param) the
    per-axis alpha is scanned so that alpha' lands near the target.
    P-values are cached in the context, so repeated selections (ROC sweeps)
    only redo the step-up.
    """

    @property
    def name(self) -> str:
        return "select"

    def execute(self, ctx: ReplicationContext, params: dict):
        statistics = ctx.require("statistics")
        pvalues = ctx.get("pvalues")
        if pvalues is None:
            pvalues = {axis: p_values(tm) for axis, tm in statistics.items()}
            ctx.set("pvalues", pvalues)

        def select_at(alpha: float):
            sels = {axis: bh_select(pv, alpha) for axis, pv in pvalues.items()}
            sups = {axis: support_estimate(sel, pvalues[axis].dim) for axis, sel in sels.items()}
            return sels, sups

        target = None if (params or {}).get("alpha") is not None else ctx.option(params, "target_alpha_prime")
        if target is not None:
            p, q = pvalues[Axis.OMEGA].dim, pvalues[Axis.GAMMA].dim

            def supports_at(alpha: float):
                _, sups = select_at(alpha)
                return sups[Axis.OMEGA], sups[Axis.GAMMA]

            choice = choose_alpha_for_target(target, p, q, supports_at, grid=(params or {}).get("alpha_grid"))
            ctx.set("alpha_choice", choice)
            alpha = choice.alpha
        else:
            alpha = ctx.option(params, "alpha")
            if alpha is None:
                raise ValueError("Select step requires 'alpha' or 'target_alpha_prime'")

        selections, supports = select_at(alpha)
        ctx.set("alpha", alpha)
        ctx.set("selections", selections)
        ctx.set("supports", supports)


StepRegistry.register(SelectStep())
