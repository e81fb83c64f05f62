from typing import Dict, List

from loguru import logger

from kronfdr.core.steps.base import PipelineStep


class StepRegistry:
    """Name -> step lookup. Step modules register themselves on import."""

    _steps: Dict[str, PipelineStep] = {}

    @classmethod
    def register(cls, step: PipelineStep):
        if step.name in cls._steps:
            logger.warning(f"Replication step '{step.name}' registered twice; keeping {type(step).__name__}")
        cls._steps[step.name] = step
        logger.debug(f"Replication step available: {step.name} ({type(step).__name__})")

    @classmethod
    def get_step(cls, name: str) -> PipelineStep:
        try:
            return cls._steps[name]
        except KeyError:
            raise ValueError(f"No replication step named '{name}'; known: {sorted(cls._steps)}")

    @classmethod
    def list_steps(cls) -> List[str]:
        return list(cls._steps)
