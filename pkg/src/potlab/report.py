"""Verdict records shared by the equivalence harnesses."""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ClassificationReport:
    """Independent verdicts for the conditions of one equivalence result.

    ``verdicts`` maps a condition identifier such as ``"P2.3.v'"`` to a
    boolean; ``consistent`` is True when the verdicts follow the logical
    pattern the result asserts (equivalences, implications, or
    conditional equivalences).  ``violations`` lists the pattern clauses that
    failed, which is empty on every valid input.
    """

    theorem: str
    verdicts: dict
    witnesses: dict = field(default_factory=dict)
    consistent: bool = True
    violations: tuple = ()
    notes: tuple = ()

    def __getitem__(self, key):
        return self.verdicts[key]

    @property
    def verdict(self):
        """Common value of the verdicts when they all agree, else None."""
        vals = set(self.verdicts.values())
        return vals.pop() if len(vals) == 1 else None


class Pattern:
    """Collects pattern clauses and records which ones fail."""

    def __init__(self, verdicts):
        self.v = verdicts
        self.failed = []

    def equivalent(self, *keys):
        vals = [self.v[k] for k in keys]
        if len(set(vals)) > 1:
            self.failed.append(" <=> ".join(keys))

    def implies(self, a, b):
        if self.v[a] and not self.v[b]:
            self.failed.append(f"{a} => {b}")

    def require(self, ok, clause):
        if not ok:
            self.failed.append(clause)


def build_report(theorem, verdicts, pattern, witnesses=None, notes=()):
    """Evaluate ``pattern(Pattern)`` over ``verdicts`` and freeze the result."""
    verdicts = {k: bool(v) for k, v in verdicts.items()}
    p = Pattern(verdicts)
    pattern(p)
    return ClassificationReport(
        theorem=theorem,
        verdicts=verdicts,
        witnesses=dict(witnesses or {}),
        consistent=not p.failed,
        violations=tuple(p.failed),
        notes=tuple(notes),
    )
