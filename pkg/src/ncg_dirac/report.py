"""Check results, verification reports and the package exceptions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-9


class InvalidModel(ValueError):
    """Input data does not define a valid algebra, calculus, metric or connection."""


class DimensionError(ValueError):
    """Coefficient vector has the wrong length for the algebra or module."""


class NotApplicable(RuntimeError):
    """A check whose hypotheses are structurally absent (e.g. no wedge data)."""


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""
    required: bool = True

    def __post_init__(self):
        if not self.residual >= 0 and not math.isnan(self.residual):
            raise ValueError(f"negative residual for {self.name}")

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        opt = "" if self.required else " (optional)"
        return f"[{mark}] {self.name}{opt}: residual={self.residual:.3e} {self.detail}".rstrip()


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        """True when every required check passed."""
        return all(c.passed for c in self.checks if c.required)

    @property
    def failed(self) -> set[str]:
        return {c.name for c in self.checks if not c.passed}

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def names(self) -> list[str]:
        return [c.name for c in self.checks]

    def summary(self) -> str:
        return "\n".join(c.line() for c in self.checks)


def norm(x) -> float:
    """Frobenius norm (2-norm for vectors) as a plain float."""
    return float(np.linalg.norm(np.asarray(x)))


def make_check(name: str, residual: float, tol: float, detail: str = "", required: bool = True) -> CheckResult:
    residual = float(residual)
    return CheckResult(name, bool(residual < tol), residual, detail, required)


def frozen(a, dtype=complex) -> np.ndarray:
    """Copy into a read-only array."""
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out
