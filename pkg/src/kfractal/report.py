"""Validation findings shared by the graph and system checkers."""

from __future__ import annotations

from dataclasses import dataclass, field

STRUCTURAL = "structural"
AXIOM = "axiom"


@dataclass(frozen=True)
class Finding:
    kind: str  # STRUCTURAL (malformed tables) or AXIOM (well-formed but invalid)
    code: str
    subject: str
    detail: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.code}: {self.subject}: {self.detail}"


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, kind: str, code: str, subject: str, detail: str) -> None:
        self.findings.append(Finding(kind, code, subject, detail))

    def structural(self) -> list[Finding]:
        return [f for f in self.findings if f.kind == STRUCTURAL]

    def axiom_violations(self) -> list[Finding]:
        return [f for f in self.findings if f.kind == AXIOM]

    def codes(self) -> set[str]:
        return {f.code for f in self.findings}

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(f) for f in self.findings)
