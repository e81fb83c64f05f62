import time
from typing import Any, Dict, List, Optional


class ReplicationContext:
    """Shared state passed between the steps of one replication."""
    def __init__(self, config=None, replication: int = 0, seed: int = 0, seeds: Optional[Dict[str, int]] = None):
        self.config = config
        self.replication = replication
        self.seed = seed
        self.seeds: Dict[str, int] = dict(seeds or {})
        self.data: Dict[str, Any] = {}
        self.history: List[str] = []
        self.trace: List[Dict[str, Any]] = []

    def set(self, key: str, value: Any):
        self.data[key] = value

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def option(self, params: dict, name: str, default=None):
        """Step parameter, falling back to the experiment config, then to default."""
        if params and params.get(name) is not None:
            return params[name]
        value = getattr(self.config, name, None) if self.config is not None else None
        return default if value is None else value

    def require(self, key: str) -> Any:
        if key not in self.data:
            raise ValueError(f"Context has no '{key}'; steps run so far: {self.history}")
        return self.data[key]

    def add_trace(self, step_name: str, duration: float, status: str, error: str = None):
        self.trace.append({
            "step": step_name,
            "duration": duration,
            "status": status,
            "error": error,
            "timestamp": time.time()
        })

    @property
    def wall_time(self) -> float:
        return float(sum(t["duration"] for t in self.trace))
