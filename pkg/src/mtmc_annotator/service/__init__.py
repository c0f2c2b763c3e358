"""Multi-user annotation service: HTTP API, job pipeline and write path."""

from .broker import Broker, Delivery, InProcessBroker, JobMessage
from .jobs import JobInfo, PipelineRunner
from .config import ServiceConfig, load_service_config

__all__ = [
    "Broker",
    "Delivery",
    "InProcessBroker",
    "JobInfo",
    "JobMessage",
    "PipelineRunner",
    "ServiceConfig",
    "load_service_config",
]
