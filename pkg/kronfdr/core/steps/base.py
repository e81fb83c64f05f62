from abc import ABC, abstractmethod

from kronfdr.core.context import ReplicationContext


class PipelineStep(ABC):
    """
    One stage of a replication (generate, sample, estimate, select, evaluate).

    A step reads what earlier stages left in the context and stores its own
    products under fixed keys; it holds no state between replications, so one
    instance serves every worker thread.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Key the runner and the params dict use for this step."""

    @abstractmethod
    def execute(self, ctx: ReplicationContext, params: dict):
        """Run on ``ctx``. ``params`` overrides the experiment config for this call only."""
