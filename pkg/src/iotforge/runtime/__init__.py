from .broker import (
    DELIVERY_LATENCY_MS,
    RESPONSE_LATENCY_MS,
    Broker,
    CommandMsg,
    Message,
    RequestMsg,
    ResponseMsg,
    RunLog,
    Subscription,
)
from .clock import VirtualClock
from .engine import Simulation, compute_common, periodic_times, run_simulation, sample_at
from .evaluate import eval_expr, eval_guard
from .traces import Reading, SensorTrace, StorageSeed, load_seeds, load_traces

__all__ = [
    "Broker", "CommandMsg", "DELIVERY_LATENCY_MS", "Message", "RESPONSE_LATENCY_MS", "Reading",
    "RequestMsg", "ResponseMsg", "RunLog", "SensorTrace", "Simulation", "StorageSeed",
    "Subscription", "VirtualClock", "compute_common", "eval_expr", "eval_guard", "load_seeds",
    "load_traces", "periodic_times", "run_simulation", "sample_at",
]
