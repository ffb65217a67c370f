"""wexfab: a web information extraction fabric.

Three cooperating pieces: an XML task language (WetDL) compiled into a
deterministic operator dataflow, an example-driven wrapper learner based on
context generalization, and a policy engine that replans and reconfigures
the running network.  An evaluation kit with synthetic ground-truth sources
rounds out the toolbox.
"""

from .dataflow import ServiceEntry, ServiceRegistry, apply_reconfiguration, compile_network, execute
from .wetdl import TaskNetwork, parse_task, serialize_task, validate_network

__version__ = "0.1.0"

__all__ = [
    "ServiceEntry",
    "ServiceRegistry",
    "TaskNetwork",
    "__version__",
    "apply_reconfiguration",
    "compile_network",
    "execute",
    "parse_task",
    "serialize_task",
    "validate_network",
]
