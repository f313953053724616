"""Scenario files, trace replay, reports and the command line."""

from .io import (
    ReportSpec,
    ScenarioDocument,
    ScenarioFormatError,
    load_document,
    load_scenario,
    load_trace,
    save_scenario,
    save_trace,
)
from .simulate import CongestionReport, replay, simulate

__all__ = [
    "CongestionReport",
    "ReportSpec",
    "ScenarioDocument",
    "ScenarioFormatError",
    "load_document",
    "load_scenario",
    "load_trace",
    "replay",
    "save_scenario",
    "save_trace",
    "simulate",
]
