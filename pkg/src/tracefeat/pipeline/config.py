"""Pipeline configuration and its plain-text ``key = value`` format."""
from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass, fields
from typing import Optional

from ..errors import ContractError
from ..learn import ClassifierSpec
from ..trace import TraceParams

DEFAULT_KEEP = (104, 60, 60)


@dataclass(frozen=True)
class PipelineConfig:
    n_phi: int = 71
    n_rho: int = 71
    n_xi: int = 251
    phi_range: str = "full"
    rho_range: str = "signed"
    functional: str = "if2"
    q: float = 2.0
    r: float = 0.5
    sampling: str = "bilinear"
    kernel_size: int = 3
    kernel_sigma: float = 1.0
    keep: Optional[tuple] = DEFAULT_KEEP  # None keeps every (mu, k) value
    classifier: str = "svm"
    svm_c: float = 1.0
    svm_epochs: int = 200
    folds: int = 10
    seed: int = 0
    fss_patience: int = 1
    cache: str = "features.csv"
    threads: int = 0  # 0 = available parallelism

    def __post_init__(self):
        if self.keep is not None:
            object.__setattr__(self, "keep", tuple(int(k) for k in self.keep))
        self.trace_params()
        self.classifier_spec()
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ContractError(f"kernel_size must be odd, got {self.kernel_size}")
        if self.folds < 2:
            raise ContractError(f"folds must be >= 2, got {self.folds}")

    def trace_params(self) -> TraceParams:
        return TraceParams(self.n_phi, self.n_rho, self.n_xi, self.phi_range, self.rho_range,
                           self.functional, self.q, self.r, self.sampling)

    def classifier_spec(self) -> ClassifierSpec:
        return ClassifierSpec(self.classifier, self.svm_c, self.svm_epochs, self.seed)

    def effective_threads(self):
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_text(self):
        lines = ["# tracefeat pipeline configuration"]
        for f in fields(self):
            lines.append(f"{f.name} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        types = {f.name: f for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ContractError(f"config line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ContractError(f"config line {lineno}: unknown key {key!r}")
            values[key] = _parse(key, value, cls.__dataclass_fields__[key].default)
        return cls(**values)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_text(fh.read())

    def feature_hash(self):
        """Digest of the fields that change extracted features."""
        keys = ("n_phi", "n_rho", "n_xi", "phi_range", "rho_range", "functional", "q", "r",
                "sampling", "kernel_size", "kernel_sigma", "keep")
        text = ";".join(f"{k}={_format(getattr(self, k))}" for k in keys)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _format(value):
    if value is None:
        return "full"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_keep(value):
    value = value.strip().lower()
    if value in ("full", "all", ""):
        return None
    try:
        keep = tuple(int(v) for v in value.split(","))
    except ValueError:
        raise ContractError(f"keep must be 'full' or three comma-separated integers, got {value!r}")
    if len(keep) != 3:
        raise ContractError(f"keep needs one count per channel (Y,Cb,Cr), got {value!r}")
    return keep


def _parse(key, value, default):
    if key == "keep":
        return parse_keep(value)
    try:
        if isinstance(default, bool):
            return value.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError:
        raise ContractError(f"config key {key!r}: cannot parse {value!r}")
    return value
