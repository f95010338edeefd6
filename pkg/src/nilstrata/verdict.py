from __future__ import annotations

from dataclasses import dataclass, field

from .linalg import ExactMatrix

WITNESS = "witness"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


@dataclass
class IsoVerdict:
    """Outcome of an isomorphism or congruence query.

    A witness is always an exactly verified matrix; a refutation lists the
    invariants whose values differ as {name: (left, right)}.
    """

    kind: str
    witness: ExactMatrix | None = None
    invariants: dict = field(default_factory=dict)
    spent: int = 0
    note: str = ""

    @property
    def is_witness(self) -> bool:
        return self.kind == WITNESS

    @property
    def is_refuted(self) -> bool:
        return self.kind == REFUTED

    @property
    def is_inconclusive(self) -> bool:
        return self.kind == INCONCLUSIVE

    def summary(self) -> str:
        if self.is_witness:
            return f"Witness g = {self.witness.text()}"
        if self.is_refuted:
            parts = ", ".join(f"{k}: {a} vs {b}" for k, (a, b) in self.invariants.items())
            return f"Refuted ({parts})"
        return f"Inconclusive after {self.spent} solves"

    def to_dict(self) -> dict:
        out = {"verdict": self.kind, "spent": self.spent}
        if self.witness is not None:
            out["witness"] = self.witness.text()
        if self.invariants:
            out["invariants"] = {k: [str(a), str(b)] for k, (a, b) in self.invariants.items()}
        if self.note:
            out["note"] = self.note
        return out


def Witness(g: ExactMatrix, spent: int = 0, note: str = "") -> IsoVerdict:
    return IsoVerdict(WITNESS, witness=g, spent=spent, note=note)


def Refuted(invariants: dict, note: str = "") -> IsoVerdict:
    return IsoVerdict(REFUTED, invariants=dict(invariants), note=note)


def Inconclusive(spent: int, note: str = "") -> IsoVerdict:
    return IsoVerdict(INCONCLUSIVE, spent=spent, note=note)
