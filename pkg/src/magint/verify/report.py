"""Check results and their text / JSON rendering."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

PASS, FAIL, INFO = "pass", "fail", "report"


@dataclass
class Check:
    """One verified claim.

    ``symbolic_zero`` is None when the check is not an exact zero test and
    ``numeric_max`` is None when no numeric oracle applies.
    """

    check_id: str
    citation: str
    symbolic_zero: bool | None
    numeric_max: float | None = None
    verdict: str = PASS
    witness: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL


def decide(symbolic_zero: bool | None, numeric_max: float | None, tol: float) -> str:
    """A pass needs an exact zero and, when sampled, a small numeric residual."""
    if symbolic_zero is False:
        return FAIL
    if numeric_max is not None and not numeric_max < tol:
        return FAIL
    return PASS


@dataclass
class Report:
    system: str
    title: str
    seed: int
    tol: float
    samples: int
    checks: list = field(default_factory=list)
    elapsed: float = 0.0
    notes: list = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_id(self, check_id: str) -> Check:
        for c in self.checks:
            if c.check_id == check_id:
                return c
        raise KeyError(check_id)

    def to_dict(self) -> dict:
        rows = []
        for c in self.checks:
            row = {
                "system": self.system,
                "check_id": c.check_id,
                "citation": c.citation,
                "symbolic_zero": c.symbolic_zero,
                "numeric_max": _num(c.numeric_max),
                "seed": self.seed,
                "verdict": c.verdict,
            }
            if c.witness:
                row["witness"] = c.witness
            if c.detail:
                row["detail"] = c.detail
            rows.append(row)
        return {
            "system": self.system,
            "title": self.title,
            "seed": self.seed,
            "tolerance": self.tol,
            "samples": self.samples,
            "ok": self.ok,
            "checks": rows,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False, ensure_ascii=False)

    def to_text(self, timing: bool = True) -> str:
        head = f"{self.title}: {self.system}  (seed {self.seed}, tol {self.tol:g}, samples {self.samples})"
        lines = [head]
        width = max((len(c.check_id) for c in self.checks), default=0)
        for c in self.checks:
            sym = {True: "zero", False: "NONZERO", None: "-"}[c.symbolic_zero]
            num = "-" if c.numeric_max is None else f"{c.numeric_max:.2e}"
            lines.append(f"  [{c.verdict.upper():6}] {c.check_id:<{width}}  symbolic={sym:<7} numeric={num:<9} {c.citation}")
            if c.witness:
                for w in c.witness.splitlines():
                    lines.append(f"           {w}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        tail = "all checks pass" if self.ok else "FAILURES present"
        if timing:
            tail += f"  ({self.elapsed:.2f} s)"
        lines.append(tail)
        return "\n".join(lines)


def _num(v):
    if v is None:
        return None
    return float(f"{v:.6e}")


def merge(title: str, reports: list) -> dict:
    """Structured document for several reports."""
    return {"title": title, "ok": all(r.ok for r in reports), "reports": [r.to_dict() for r in reports]}
