"""Data generation, ingestion, history building and the benchmark harness."""

from .experiments import (
    BenchConfig,
    BenchReport,
    pick_eval_days,
    run_accuracy_experiment,
    run_cuts_experiment,
    run_efficiency_experiment,
)
from .history import make_history
from .ingest import (
    IngestError,
    TripRecord,
    WeatherDay,
    build_instances,
    cluster_zones,
    read_trips,
    read_weather,
    zone_distances,
)
from .synth import (
    EXOGENOUS_NAMES,
    SynthConfig,
    World,
    WorldDay,
    generate_world,
    simulate_profit,
    weather_factor,
)

__all__ = [
    "BenchConfig",
    "BenchReport",
    "EXOGENOUS_NAMES",
    "IngestError",
    "SynthConfig",
    "TripRecord",
    "WeatherDay",
    "World",
    "WorldDay",
    "build_instances",
    "cluster_zones",
    "generate_world",
    "make_history",
    "pick_eval_days",
    "read_trips",
    "read_weather",
    "run_accuracy_experiment",
    "run_cuts_experiment",
    "run_efficiency_experiment",
    "simulate_profit",
    "weather_factor",
    "zone_distances",
]
