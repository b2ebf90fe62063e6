"""Verification reports: per-sample records and the schema "1" JSON layout."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from src.config import CONFIG
from src.identities import CheckResult
from src.numerics import format_scalar
from src.utils.io import dump_json, load_json, save_json
from src.utils.metrics import verification_summary


@dataclass(frozen=True)
class SampleRecord:
    index: int
    params: Dict[str, str]
    passed: bool
    lhs: Optional[str] = None
    rhs: Optional[str] = None
    rel_err: Optional[float] = None
    effective_tol: Optional[float] = None
    cancellation_digits: Optional[float] = None
    m: Optional[int] = None
    c: Optional[str] = None
    shift_rel_err: Optional[float] = None
    error: Optional[str] = None

    @classmethod
    def from_check(cls, index: int, result: CheckResult) -> "SampleRecord":
        extras = result.extras
        return cls(
            index=index,
            params=format_params(result.params),
            passed=result.passed,
            lhs=format_scalar(result.lhs.value),
            rhs=format_scalar(result.rhs.value),
            rel_err=result.rel_err,
            effective_tol=result.effective_tol,
            cancellation_digits=max(result.lhs.cancellation_digits, result.rhs.cancellation_digits),
            m=extras.get("m"),
            c=format_scalar(extras["c"]) if "c" in extras else None,
            shift_rel_err=extras.get("shift_rel_err"),
        )

    @classmethod
    def from_error(cls, index: int, params: Mapping[str, Any], error: Exception, m: Optional[int] = None) -> "SampleRecord":
        return cls(
            index=index,
            params=format_params(params),
            passed=False,
            m=m,
            error=f"{type(error).__name__}: {error}",
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "index": self.index,
            "params": dict(self.params),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "rel_err": self.rel_err,
            "effective_tol": self.effective_tol,
            "cancellation_digits": self.cancellation_digits,
            "pass": self.passed,
        }
        for key in ("m", "c", "shift_rel_err", "error"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SampleRecord":
        return cls(
            index=int(data["index"]),
            params=dict(data["params"]),
            passed=bool(data["pass"]),
            lhs=data.get("lhs"),
            rhs=data.get("rhs"),
            rel_err=data.get("rel_err"),
            effective_tol=data.get("effective_tol"),
            cancellation_digits=data.get("cancellation_digits"),
            m=data.get("m"),
            c=data.get("c"),
            shift_rel_err=data.get("shift_rel_err"),
            error=data.get("error"),
        )


def format_params(params: Mapping[str, Any]) -> Dict[str, str]:
    return {name: format_scalar(value) for name, value in params.items()}


@dataclass
class Report:
    identity: str
    seed: int
    tol: float
    samples: List[SampleRecord] = field(default_factory=list)
    schema_version: str = CONFIG.schema_version

    @property
    def passed(self) -> bool:
        return bool(self.samples) and all(s.passed for s in self.samples)

    def summary(self) -> Dict[str, Any]:
        return verification_summary(s.to_dict() for s in self.samples)

    def to_dict(self) -> Dict[str, Any]:
        samples = [s.to_dict() for s in self.samples]
        return {
            "schema_version": self.schema_version,
            "identity": self.identity,
            "seed": self.seed,
            "tol": self.tol,
            "samples": samples,
            "summary": verification_summary(samples),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Report":
        version = data.get("schema_version")
        if version != CONFIG.schema_version:
            raise ValueError(f"unsupported report schema version {version!r}")
        return cls(
            identity=data["identity"],
            seed=int(data["seed"]),
            tol=float(data["tol"]),
            samples=[SampleRecord.from_dict(s) for s in data["samples"]],
            schema_version=version,
        )

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    def write(self, path: Path) -> None:
        save_json(self.to_dict(), path)

    @classmethod
    def read(cls, path: Path) -> "Report":
        return cls.from_dict(load_json(path))
