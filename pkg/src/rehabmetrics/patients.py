"""Patient registry with JSON persistence.

Records carry the demographic fields the clinic tracks (age, sex, impairment
duration, affected limb). Duplicate registrations are detected on the natural
key (full name, birth year) rather than the opaque patient id, so re-submitting
the same intake form is a conflict instead of a silent second record.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path


class Sex(Enum):
    FEMALE = "F"
    MALE = "M"


class Limb(Enum):
    LEFT = "Left"
    RIGHT = "Right"


class DuplicatePatientError(ValueError):
    """Raised when the natural key (full name, birth year) already exists."""


@dataclass(frozen=True)
class PatientRecord:
    patient_id: str
    full_name: str
    birth_year: int
    age_years: int
    sex: Sex
    uld_duration_months: int
    affected_limb: Limb

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sex"] = self.sex.value
        d["affected_limb"] = self.affected_limb.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PatientRecord":
        return cls(
            patient_id=d["patient_id"],
            full_name=d["full_name"],
            birth_year=int(d["birth_year"]),
            age_years=int(d["age_years"]),
            sex=Sex(d["sex"]),
            uld_duration_months=int(d["uld_duration_months"]),
            affected_limb=Limb(d["affected_limb"]),
        )


class PatientRegistry:
    """CRUD over patient records, one JSON file per patient under a data dir."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, patient_id: str) -> Path:
        return self.root / f"{patient_id}.json"

    @staticmethod
    def _natural_key(full_name: str, birth_year: int) -> tuple[str, int]:
        return (" ".join(full_name.split()).lower(), birth_year)

    def register(
        self,
        full_name: str,
        birth_year: int,
        age_years: int,
        sex: Sex | str,
        uld_duration_months: int,
        affected_limb: Limb | str,
    ) -> PatientRecord:
        """Create a record; rejects duplicates of (full name, birth year).

        Raises:
            DuplicatePatientError: natural key already registered.
            ValueError: demographic field out of range.
        """
        if not full_name.strip():
            raise ValueError("full_name must be non-empty")
        if age_years <= 0:
            raise ValueError(f"age_years must be positive, got {age_years}")
        if uld_duration_months < 0:
            raise ValueError(
                f"uld_duration_months must be non-negative, got {uld_duration_months}"
            )
        key = self._natural_key(full_name, birth_year)
        for rec in self.list():
            if self._natural_key(rec.full_name, rec.birth_year) == key:
                raise DuplicatePatientError(
                    f"patient already registered: {rec.patient_id}"
                )
        rec = PatientRecord(
            patient_id=uuid.uuid4().hex[:12],
            full_name=full_name.strip(),
            birth_year=birth_year,
            age_years=age_years,
            sex=Sex(sex),
            uld_duration_months=uld_duration_months,
            affected_limb=Limb(affected_limb),
        )
        self._path(rec.patient_id).write_text(json.dumps(rec.to_dict(), indent=2))
        return rec

    def get(self, patient_id: str) -> PatientRecord:
        p = self._path(patient_id)
        if not p.exists():
            raise KeyError(f"unknown patient id: {patient_id!r}")
        return PatientRecord.from_dict(json.loads(p.read_text()))

    def list(self) -> list[PatientRecord]:
        recs = [
            PatientRecord.from_dict(json.loads(p.read_text()))
            for p in sorted(self.root.glob("*.json"))
        ]
        return recs

    def delete(self, patient_id: str) -> None:
        p = self._path(patient_id)
        if not p.exists():
            raise KeyError(f"unknown patient id: {patient_id!r}")
        p.unlink()
