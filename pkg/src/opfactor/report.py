"""Pass/fail reports produced by the certificate verifiers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    bound: float
    note: str = ""


@dataclass
class VerificationReport:
    """Ordered collection of named checks; ``passed`` iff every check passed."""

    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, measured: float = 0.0, bound: float = 0.0, note: str = "") -> None:
        self.checks.append(Check(name, bool(passed), float(measured), float(bound), note))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def table(self) -> str:
        width = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{'check':<{width}}  {'status':<6}  {'measured':>12}  {'bound':>12}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = f"{c.name:<{width}}  {status:<6}  {c.measured:>12.4e}  {c.bound:>12.4e}"
            if c.note:
                line += f"  {c.note}"
            lines.append(line)
        return "\n".join(lines)
