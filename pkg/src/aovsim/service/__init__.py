"""Service boundary: pydantic wire models and the FastAPI application."""

from .app import app
from .schemas import (
    SCHEMA_VERSION,
    AirSection,
    AnalysisSection,
    BeamSection,
    CalibrateRequest,
    CalibrationResponse,
    DemoTracePayload,
    FitRequest,
    FitResponse,
    FrequencySweepRequest,
    HealthResponse,
    InterferometerSection,
    PeakPayload,
    RunConfig,
    SceneSection,
    SimulateRequest,
    SimulateResponse,
    SqueezeDemoRequest,
    SqueezeDemoResponse,
    SqueezerSection,
    SweepResponse,
    SweepRowPayload,
    TemperatureSweepRequest,
    TracePayload,
)

__all__ = [
    "SCHEMA_VERSION",
    "AirSection",
    "AnalysisSection",
    "BeamSection",
    "CalibrateRequest",
    "CalibrationResponse",
    "DemoTracePayload",
    "FitRequest",
    "FitResponse",
    "FrequencySweepRequest",
    "HealthResponse",
    "InterferometerSection",
    "PeakPayload",
    "RunConfig",
    "SceneSection",
    "SimulateRequest",
    "SimulateResponse",
    "SqueezeDemoRequest",
    "SqueezeDemoResponse",
    "SqueezerSection",
    "SweepResponse",
    "SweepRowPayload",
    "TemperatureSweepRequest",
    "TracePayload",
    "app",
]
