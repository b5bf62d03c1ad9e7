"""Structured results for mathematical law checks.

Every checker returns a :class:`CheckReport`: one entry per verified
instance of a law, carrying the law text, the witness indices (1-based, as
in written subscripts) and the residual in canonical form.  Failures are
report entries, never exceptions; exceptions are reserved for structural
misuse of the API.
"""
from __future__ import annotations

from dataclasses import dataclass, field


class StructureError(ValueError):
    """A construction's precondition failed; carries a witness when available."""

    def __init__(self, message: str, witness: tuple = ()):
        super().__init__(message)
        self.witness = tuple(witness)


@dataclass(frozen=True)
class CheckEntry:
    check_id: str
    law: str
    status: str          # "pass" | "fail"
    witness: tuple       # 1-based indices of the violating (or verified) instance
    residual: str        # canonical rendering; "0" exactly when status == "pass"

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass
class CheckReport:
    structure: str
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]

    def add(self, check_id: str, law: str, witness: tuple, residual) -> CheckEntry:
        """Record one checked instance; residual is any object with ``is_zero``
        and ``render()`` (PolyScalar or GradedElement)."""
        ok = residual.is_zero
        entry = CheckEntry(
            check_id=check_id,
            law=law,
            status="pass" if ok else "fail",
            witness=tuple(witness),
            residual="0" if ok else residual.render(),
        )
        self.entries.append(entry)
        return entry

    def add_bool(self, check_id: str, law: str, witness: tuple, ok: bool, detail: str = "1"):
        entry = CheckEntry(
            check_id=check_id,
            law=law,
            status="pass" if ok else "fail",
            witness=tuple(witness),
            residual="0" if ok else detail,
        )
        self.entries.append(entry)
        return entry

    def extend(self, other: "CheckReport", prefix: str = ""):
        for e in other.entries:
            self.entries.append(
                CheckEntry(
                    check_id=f"{prefix}{e.check_id}" if prefix else e.check_id,
                    law=e.law,
                    status=e.status,
                    witness=e.witness,
                    residual=e.residual,
                )
            )

    def finalize(self) -> "CheckReport":
        """Deterministic report order: by check id, then witness."""
        self.entries.sort(key=lambda e: (e.check_id, e.witness))
        return self

    def summary(self) -> str:
        n_fail = len(self.failures)
        verdict = "pass" if n_fail == 0 else f"fail ({n_fail} violation(s))"
        return f"{self.structure}: {verdict}"
