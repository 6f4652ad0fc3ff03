"""Birth-death-move processes: thinning simulation, coupling and validation."""

from ._core import (
    BdmError,
    Configuration,
    Domain,
    SimpleChain,
    d1,
    hausdorff,
    resolve,
    run_cli,
    simulate,
)

__all__ = [
    "BdmError",
    "Configuration",
    "Domain",
    "SimpleChain",
    "d1",
    "hausdorff",
    "resolve",
    "run_cli",
    "simulate",
]
