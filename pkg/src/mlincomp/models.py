from __future__ import annotations

import re
from fractions import Fraction
from typing import Annotated, Any, Self, TypeVar, cast

from pyagnostics.exceptions import DiagnosticError, DiagnosticErrorGroup
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainValidator,
    ValidationError,
    model_validator,
)
from pydantic_core import ErrorDetails
from rich.text import Text

from mlincomp.algebra import FieldSpec, make_field, parse_field_spec
from mlincomp.bdm import BdmStatistics, bdm_random, default_checkpoints
from mlincomp.regions import LimitPair, admissible_set
from mlincomp.rich_utils import Inline

Model = TypeVar("Model", bound=BaseModel)

RATIONAL_PATTERN = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def parse_rational(value: object) -> Fraction:
    """Exact rationals only: ``p/q``, integers or Fractions. Decimals are rejected."""
    match value:
        case Fraction():
            return value
        case bool():
            pass
        case int():
            return Fraction(value)
        case str() if RATIONAL_PATTERN.match(value.strip()):
            try:
                return Fraction(value.strip())
            except ZeroDivisionError:
                raise ValueError(f"{value!r} has a zero denominator") from None
    raise ValueError(f"{value!r} is not an exact rational, expected `p/q` or an integer")


def _coerce_field(value: object) -> FieldSpec:
    try:
        match value:
            case FieldSpec():
                return value
            case str():
                return parse_field_spec(value)
            case int() if not isinstance(value, bool):
                return make_field(value)
    except DiagnosticError as e:
        raise ValueError(e.message) from None
    raise ValueError(f"{value!r} is not a field spec")


def _coerce_bits(value: object) -> tuple[bool, ...]:
    match value:
        case str() if set(value) <= {"0", "1"}:
            return tuple(bit == "1" for bit in value)
        case str():
            raise ValueError(f"{value!r} is not a bit string")
        case _:
            return tuple(bool(bit) for bit in cast(Any, value))


Rational = Annotated[Fraction, PlainValidator(parse_rational)]
FieldLike = Annotated[FieldSpec, PlainValidator(_coerce_field)]
Bits = Annotated[tuple[bool, ...], PlainValidator(_coerce_bits)]


class SynthesisPlan(BaseModel):
    """A target (I, S) for M sequences over ``field``, realized with K active series."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    field: FieldLike
    M: int = Field(ge=1)
    I: Rational
    S: Rational
    N: int = Field(ge=1)
    K: int | None = Field(default=None, ge=0)
    gap_bits: Bits = ()
    nonzero: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_admissible(self) -> Self:
        if not 0 <= self.I <= self.S <= 1:
            raise ValueError(f"Need 0 <= I <= S <= 1, got I = {self.I}, S = {self.S}")
        if self.nonzero >= self.field.q:
            raise ValueError(f"{self.nonzero} is not an element code of GF({self.field.q})")
        report = admissible_set(self.I, self.S, self.M)
        if self.K is None:
            if not report.admissible:
                raise ValueError(f"{report.pair} is not admissible for M = {self.M}")
        elif self.K > self.M or self.K not in report.admissible_K:
            raise ValueError(f"{report.pair} is not admissible with K = {self.K} for M = {self.M}")
        return self

    @property
    def target(self) -> LimitPair:
        return LimitPair(self.I, self.S)

    @property
    def active_count(self) -> int:
        if self.K is not None:
            return self.K
        k = admissible_set(self.I, self.S, self.M).k_prime
        assert k is not None
        return k

    def gap(self, hexagon: int) -> bool:
        return hexagon < len(self.gap_bits) and self.gap_bits[hexagon]


class BdmExperiment(BaseModel):
    """Seeded stochastic runs of the discharge model."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    field: FieldLike
    M: int = Field(ge=1)
    N: int = Field(ge=1)
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=1 << 64)
    eps: Rational = Fraction(1, 100)
    checkpoints: int = Field(default=10, ge=1)
    workers: int = Field(default=1, ge=1)

    def run(self) -> BdmStatistics:
        return bdm_random(
            self.field.q,
            self.M,
            self.N,
            self.trials,
            self.seed,
            eps=self.eps,
            checkpoints=default_checkpoints(self.N, self.checkpoints),
            workers=self.workers,
        )


def load_model(model_cls: type[Model], values: dict[str, Any], *, flags: dict[str, str] | None = None) -> Model:
    """Validate ``values``; failures become a DiagnosticErrorGroup naming the offending flags."""
    flags = flags or {}
    try:
        return model_cls.model_validate(values)
    except ValidationError as e:
        diagnostics: list[DiagnosticError] = []
        for error in e.errors():
            error = cast(ErrorDetails, error)
            name = ".".join(str(loc) for loc in error["loc"])
            where = flags.get(name, name)

            match error["type"]:
                case "missing":
                    diagnostics.append(
                        DiagnosticError(
                            code="mlincomp::models::validation_error",
                            message=f"Missing required parameter {where}",
                        )
                    )
                case _:
                    diagnostics.append(
                        DiagnosticError(
                            code=f"mlincomp::pydantic_validation_error::{error['type']}",
                            message=f"{where}: {error['msg']}" if where else error["msg"],
                            notes=[Inline(Text("context: ", style="blue"), repr(error["ctx"]))]
                            if "ctx" in error
                            else [],
                        )
                    )

        raise DiagnosticErrorGroup(f"Invalid {model_cls.__name__}", diagnostics) from None
