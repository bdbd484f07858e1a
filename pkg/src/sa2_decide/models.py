"""Pydantic models for caps, instance files and machine-readable reports."""
from enum import Enum
from typing import Annotated, Any

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, field_validator, model_validator

from .algebra import SL2, Instance, SA2Element

# largest integer a JSON double represents exactly
_SAFE_INTEGER = 2**53


def _parse_big_int(value: Any) -> Any:
    if isinstance(value, str):
        return int(value.strip())
    return value


def _dump_big_int(value: int) -> int | str:
    return str(value) if abs(value) > _SAFE_INTEGER else value


BigInt = Annotated[
    int,
    BeforeValidator(_parse_big_int),
    PlainSerializer(_dump_big_int, when_used="json"),
]


class Caps(BaseModel):
    """Search caps shared by every bounded layer of the deciders."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    depth: int = Field(default=12, ge=0, description="Word length for inverse-witness BFS")
    norm: int = Field(default=10**6, ge=1, description="Largest entry magnitude kept during BFS")
    closure: int = Field(default=24, ge=1, description="Finite-closure size treated as infinite beyond")
    max_states: int = Field(default=100_000, ge=1, description="Visited-state ceiling for any BFS")
    subset_cap: int = Field(default=16, ge=1, description="Largest K for identity subset enumeration")
    doublings: int = Field(default=12, ge=0, description="Exponent doublings in certificate searches")
    witness_steps: int = Field(default=12, ge=0, description="Limit steps in the free-case construction")
    pair_depth: int = Field(default=4, ge=0, description="Word length when searching for a free pair")
    oracle_depth: int = Field(default=8, ge=0, description="Word length of the identity-search fallback")
    max_word_factors: int = Field(default=100_000, ge=1, description="Factor ceiling for constructed words")


class GeneratorSpec(BaseModel):
    """One generator (A, a) as it appears in an instance file."""

    A: list[list[BigInt]] = Field(..., description="2x2 integer matrix, rows first")
    a: list[BigInt] = Field(..., description="Integer translation vector")

    @field_validator("A")
    @classmethod
    def _two_by_two(cls, rows: list[list[int]]) -> list[list[int]]:
        if len(rows) != 2 or any(len(row) != 2 for row in rows):
            raise ValueError("A must be a 2x2 matrix")
        return rows

    @field_validator("a")
    @classmethod
    def _two_entries(cls, vector: list[int]) -> list[int]:
        if len(vector) != 2:
            raise ValueError("a must have two entries")
        return vector

    @model_validator(mode="after")
    def _determinant_one(self) -> "GeneratorSpec":
        (p, q), (r, s) = self.A
        if p * s - q * r != 1:
            raise ValueError(f"matrix {self.A} has determinant {p * s - q * r}, expected 1")
        return self

    def to_element(self) -> SA2Element:
        return SA2Element(SL2.from_rows(self.A), (self.a[0], self.a[1]))

    @classmethod
    def from_element(cls, element: SA2Element) -> "GeneratorSpec":
        return cls(A=[list(row) for row in element.A.rows], a=list(element.a))


class InstanceFile(BaseModel):
    """JSON document holding the generators and optional caps."""

    generators: list[GeneratorSpec] = Field(..., min_length=1)
    caps: Caps | None = Field(default=None, description="Overrides for the configured caps")

    def to_instance(self) -> Instance:
        return Instance(tuple(spec.to_element() for spec in self.generators))

    @classmethod
    def from_instance(cls, instance: Instance, caps: Caps | None = None) -> "InstanceFile":
        return cls(generators=[GeneratorSpec.from_element(g) for g in instance.generators], caps=caps)


class DecisionReport(BaseModel):
    """Machine-readable form of a decision."""

    tag: str = Field(..., description="is-group, not-group or inconclusive")
    case: str | None = Field(default=None, description="Case label of the dispatch branch")
    certificate: list[list[BigInt]] | None = Field(
        default=None, description="Identity word as [[index, exponent], ...], 1-based"
    )
    reason: str | None = None
    stage: str | None = Field(default=None, description="Stage that capped out when inconclusive")
    subset: list[int] | None = Field(default=None, description="1-based generator subset (identity problem)")
    word_stats: dict[str, int] | None = None
    caps: Caps


class LineReport(BaseModel):
    """Invariant line for display; floats are never used by the deciders."""

    direction: tuple[float, float]
    eigenvalue: float
    role: str


class GeneratorClassReport(BaseModel):
    """Class of one generator's matrix part."""

    index: int = Field(..., description="1-based generator index")
    kind: str
    torsion_order: int | None = None
    lines: list[LineReport] = Field(default_factory=list)


class ClassifyReport(BaseModel):
    """Per-generator classes plus the structure of the matrix-part group."""

    generators: list[GeneratorClassReport]
    group_case: str
    groupness: str
    generator: list[list[BigInt]] | None = Field(default=None, description="Cyclic generator, if any")
    exponents: list[BigInt] | None = None


class RunStatus(str, Enum):
    """Possible corpus run states."""

    QUEUED = "queued"
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


class RunProgress(BaseModel):
    """Progress information for a corpus run."""

    total: int = Field(default=0, description="Instances to validate")
    completed: int = Field(default=0, description="Instances validated")
    errors: int = Field(default=0, description="Instances that raised")


class CorpusSummary(BaseModel):
    """Cross-validation summary of a corpus run."""

    status: RunStatus
    progress: RunProgress
    is_group: int = 0
    not_group: int = 0
    inconclusive: int = 0
    oracle_aborted: int = 0
    contradictions: int = 0
    contradiction_names: list[str] = Field(default_factory=list)
