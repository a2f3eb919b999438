"""Integral elements, Grassmann charts and prolongations of rank 4 distributions."""

from prolongkit.prolong.atlas import Model, embed_model, sigma_j2_atlas, sigma_j2_chart
from prolongkit.prolong.charts import (
    chart_defining_functions,
    chart_transition,
    derive_defining_functions,
)
from prolongkit.prolong.oracle import fiber_sampler_oracle
from prolongkit.prolong.plucker import (
    FiberTopology,
    PluckerFiber,
    Stratum,
    fiber_topology,
    plucker_fiber,
    stratify,
)
from prolongkit.prolong.tower import FiberPoint, prolong_rank4, prolong_tower

__all__ = [
    "FiberPoint",
    "FiberTopology",
    "Model",
    "PluckerFiber",
    "Stratum",
    "chart_defining_functions",
    "chart_transition",
    "derive_defining_functions",
    "embed_model",
    "fiber_sampler_oracle",
    "fiber_topology",
    "plucker_fiber",
    "prolong_rank4",
    "prolong_tower",
    "sigma_j2_atlas",
    "sigma_j2_chart",
    "stratify",
]
