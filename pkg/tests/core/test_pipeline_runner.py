from unittest.mock import MagicMock, patch

import pytest

from kronfdr.core.context import ReplicationContext
from kronfdr.core.pipeline import DATA_STEPS, SIMULATION_STEPS, PipelineRunner
from kronfdr.core.steps.registry import StepRegistry
from kronfdr.models.matrices import Axis
from kronfdr.models.schemas import TuningGrid


def test_pipeline_runner_success():
    runner = PipelineRunner()
    mock_step = MagicMock()
    mock_step.name = "sample"

    with patch.object(StepRegistry, "get_step", return_value=mock_step) as mock_get_step:
        ctx = runner.run(["sample"], ReplicationContext(replication=3, seed=9), {"sample": {"n": 5}})

    mock_get_step.assert_called_with("sample")
    mock_step.execute.assert_called_once()
    call_args = mock_step.execute.call_args
    assert isinstance(call_args[0][0], ReplicationContext)
    assert call_args[0][1] == {"n": 5}
    assert ctx.history == ["sample"]
    assert ctx.trace[0]["status"] == "success"
    assert ctx.wall_time == ctx.trace[0]["duration"]


def test_pipeline_runner_step_failure():
    runner = PipelineRunner()
    mock_step = MagicMock()
    mock_step.execute.side_effect = ValueError("Step Failed!")

    ctx = ReplicationContext()
    with patch.object(StepRegistry, "get_step", return_value=mock_step):
        with pytest.raises(ValueError, match="Step Failed!"):
            runner.run(["estimate", "select"], ctx)

    assert ctx.history == []
    assert len(ctx.trace) == 1
    assert ctx.trace[0]["status"] == "failed"
    assert "Step Failed" in ctx.trace[0]["error"]


def test_unknown_step():
    with pytest.raises(ValueError, match="No replication step named"):
        PipelineRunner().run(["plot"])


def test_all_pipeline_steps_registered():
    registered = StepRegistry.list_steps()
    missing = [s for s in SIMULATION_STEPS + DATA_STEPS if s not in registered]
    assert not missing, f"Missing pipeline steps: {missing}. Registered: {registered}"


def test_context_option_falls_back_to_config(small_config):
    ctx = ReplicationContext(config=small_config)
    assert ctx.option({}, "alpha") == 0.1
    assert ctx.option({"alpha": 0.2}, "alpha") == 0.2
    assert ctx.option({}, "missing", 7) == 7
    with pytest.raises(ValueError):
        ctx.require("dataset")


def test_real_data_steps_without_model(small_dataset):
    ctx = ReplicationContext()
    ctx.set("dataset", small_dataset)
    PipelineRunner().run(DATA_STEPS, ctx, {
        "estimate": {"tuning_grid": TuningGrid(lambdas=[2.0], deltas=[2.0])},
        "select": {"alpha": 0.2},
    })
    metrics = ctx.require("metrics")
    assert metrics.fdp_joint is None
    supports = ctx.require("supports")
    assert metrics.a == supports[Axis.OMEGA].discoveries
    assert metrics.b == supports[Axis.GAMMA].discoveries
    assert ctx.history == DATA_STEPS
