"""Package namespace for the somkit modules: Kohonen maps for data analysis."""

from . import (
    cli,
    config,
    dataset,
    datasets,
    errors,
    fills,
    helpers,
    init,
    layout,
    metrics,
    persist,
    qualitative,
    quantize,
    rng,
    superclass,
    topology,
    viz,
)

__all__ = [
    "cli",
    "config",
    "dataset",
    "datasets",
    "errors",
    "fills",
    "helpers",
    "init",
    "layout",
    "metrics",
    "persist",
    "qualitative",
    "quantize",
    "rng",
    "superclass",
    "topology",
    "viz",
]
