from kronfdr.core.steps.registry import StepRegistry
from kronfdr.core.steps.generate import GenerateStep
from kronfdr.core.steps.sample import SampleStep
from kronfdr.core.steps.estimate import EstimateStep
from kronfdr.core.steps.select import SelectStep
from kronfdr.core.steps.evaluate import EvaluateStep

# This ensures they are registered
__all__ = ["StepRegistry"]
