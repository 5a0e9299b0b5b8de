"""File formats (schema version 1) and experiment configuration.

Every JSON document the harness reads or writes is validated through one of
these models; FORMATS.md has a worked example for each.
"""
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = 1


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


# Norm descriptors

class LpSpec(_Spec):
    kind: Literal["lp"] = "lp"
    n: int = Field(ge=0)
    p: Union[float, Literal["inf"]]


class TopKSpec(_Spec):
    kind: Literal["top_k"] = "top_k"
    n: int = Field(ge=1)
    k: int = Field(ge=1)


class OrderedSpec(_Spec):
    kind: Literal["ordered"] = "ordered"
    weights: List[float]


class SymmetricMaxSpec(_Spec):
    kind: Literal["symmetric_max"] = "symmetric_max"
    weights: List[List[float]]


class MaxLinearSpec(_Spec):
    kind: Literal["max_linear"] = "max_linear"
    rows: List[List[float]]


class LovaszSpec(_Spec):
    kind: Literal["lovasz"] = "lovasz"
    n: int = Field(ge=0)
    set_function: Dict[str, Any]


class MatroidRankSpec(_Spec):
    kind: Literal["matroid_rank"] = "matroid_rank"
    matroid: Dict[str, Any]


class PartSpec(_Spec):
    indices: List[int]
    norm: "NormSpec"


class PartialSumSpec(_Spec):
    kind: Literal["partial_sum"] = "partial_sum"
    n: int = Field(ge=0)
    parts: List[PartSpec]


class TermSpec(_Spec):
    coefficient: float = Field(ge=0)
    norm: "NormSpec"


class ConicalSpec(_Spec):
    kind: Literal["conical"] = "conical"
    terms: List[TermSpec]


class RescaledSpec(_Spec):
    kind: Literal["rescaled"] = "rescaled"
    scale: List[float]
    norm: "NormSpec"


class RestrictedSpec(_Spec):
    kind: Literal["restricted"] = "restricted"
    dim: int = Field(ge=0)
    norm: "NormSpec"


NormSpec = Annotated[
    Union[LpSpec, TopKSpec, OrderedSpec, SymmetricMaxSpec, MaxLinearSpec, LovaszSpec,
          MatroidRankSpec, PartialSumSpec, ConicalSpec, RescaledSpec, RestrictedSpec],
    Field(discriminator="kind"),
]

for _model in (PartSpec, PartialSumSpec, TermSpec, ConicalSpec, RescaledSpec, RestrictedSpec):
    _model.model_rebuild()


class NormDocument(_Spec):
    """Wrapper used to validate a bare descriptor through the discriminated union."""

    norm: NormSpec


# Metric spaces

class MatrixMetricSpec(_Spec):
    type: Literal["matrix"] = "matrix"
    distances: List[List[float]]


class EuclideanMetricSpec(_Spec):
    type: Literal["euclidean"] = "euclidean"
    points: List[List[float]]


class TreeMetricSpec(_Spec):
    type: Literal["tree"] = "tree"
    arity: int = Field(ge=2)
    height: int = Field(ge=1)
    edge_lengths: List[float]


MetricSpec = Annotated[
    Union[MatrixMetricSpec, EuclideanMetricSpec, TreeMetricSpec],
    Field(discriminator="type"),
]


class CostSpec(_Spec):
    uniform: Optional[float] = Field(default=None, ge=0)
    per_point: Optional[List[float]] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.uniform is None) == (self.per_point is None):
            raise ValueError("costs must give exactly one of 'uniform' or 'per_point'")
        if self.per_point is not None and any(c < 0 for c in self.per_point):
            raise ValueError("per-point facility costs must be non-negative")
        return self


class OflInstanceSpec(_Spec):
    schema_: int = Field(default=SCHEMA_VERSION, alias="schema")
    metric: MetricSpec
    requests: List[int]
    costs: CostSpec
    openable: List[int] = Field(default_factory=list)
    norm: NormSpec

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


# Stochastic probing

class DistributionSpec(_Spec):
    support: List[float]
    probs: List[float]


class FamilySpec(_Spec):
    kind: Literal["explicit", "cardinality", "matroid"]
    n: int = Field(ge=0)
    sets: Optional[List[List[int]]] = None
    k: Optional[int] = None
    matroid: Optional[Dict[str, Any]] = None


class ProbingInstanceSpec(_Spec):
    schema_: int = Field(default=SCHEMA_VERSION, alias="schema")
    distributions: List[DistributionSpec]
    family: FamilySpec
    norm: NormSpec

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


# Generalized load balancing

class LoadBalInstanceSpec(_Spec):
    schema_: int = Field(default=SCHEMA_VERSION, alias="schema")
    p: List[List[float]]
    inner_norms: List[NormSpec]

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


# Experiment configuration

class Budgets(_Spec):
    max_candidates: int = Field(default=20, ge=0)
    max_assignments: int = Field(default=10 ** 6, ge=1)
    max_probe_states: int = Field(default=65536, ge=1)


class ExperimentConfig(_Spec):
    seed: int = Field(ge=0)
    ensemble: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)
    output: Optional[str] = None
    budgets: Budgets = Field(default_factory=Budgets)

    def seeds(self):
        return list(range(self.seed, self.seed + self.ensemble))
