"""Plate-keyed vehicle records with a JSON-lines file store.

The store sits behind plain functions and a small class so a networked
registry client can replace it without touching the service: everything the
service needs is ``lookup`` and ``upsert``.

Fuzzy matching is deliberately conservative.  Recognition trips on single
characters (O/0, I/1), so a unique record within edit distance 1 is accepted;
any ambiguity returns nothing rather than someone else's dossier.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, field, asdict
from pathlib import Path


class ParseError(ValueError):
    """Store file line failed to parse or validate."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicatePlate(ValueError):
    def __init__(self, plate: str, line_number: int = 0):
        super().__init__(f"duplicate plate {plate!r}"
                         + (f" at line {line_number}" if line_number else ""))
        self.plate = plate


class WriteError(OSError):
    """Store file could not be persisted."""


_PLATE_RE = re.compile(r"^[A-Z0-9]+$")


def normalize_plate(text: str) -> str:
    """Uppercase and strip everything that is not a letter or digit."""
    return re.sub(r"[^A-Z0-9]", "", text.upper())


@dataclass(frozen=True)
class VehicleRecord:
    plate: str
    owner_name: str = ""
    contact_address: str = ""
    contact_number: str = ""
    make: str = ""
    model: str = ""
    engine_number: str = ""
    tax_status: str = ""
    stolen: bool = False
    complaints: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.plate or not _PLATE_RE.match(self.plate):
            raise ValueError(f"plate {self.plate!r} must be non-empty uppercase alphanumeric")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "VehicleRecord":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown fields {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class LookupOutcome:
    record: VehicleRecord | None
    matched: bool
    match_kind: str  # "exact" | "fuzzy" | "none"
    edit_distance: int = 0

    @classmethod
    def none(cls) -> "LookupOutcome":
        return cls(None, False, "none", 0)


def levenshtein(a: str, b: str) -> int:
    """Plain edit distance (insert/delete/substitute, unit costs)."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


class Store:
    """JSON-lines backed vehicle store.

    Reads are lock-free against an immutable snapshot; writes are serialized
    and atomically replace the file, so a lookup never observes a
    half-written record.
    """

    def __init__(self, path: str | Path, records: dict[str, VehicleRecord]):
        self.path = Path(path)
        self._records = dict(records)
        self._write_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[VehicleRecord]:
        return list(self._records.values())

    def lookup(self, plate_text: str) -> LookupOutcome:
        """Exact match first, then the unique record within edit distance 1."""
        query = normalize_plate(plate_text)
        if not query:
            return LookupOutcome.none()
        snapshot = self._records
        exact = snapshot.get(query)
        if exact is not None:
            return LookupOutcome(exact, True, "exact", 0)
        near = [r for plate, r in snapshot.items() if levenshtein(query, plate) <= 1]
        if len(near) == 1:
            return LookupOutcome(near[0], True, "fuzzy", 1)
        return LookupOutcome.none()

    def upsert(self, record: VehicleRecord) -> None:
        """Insert or replace by plate; persisted before returning."""
        with self._write_lock:
            updated = dict(self._records)
            updated[record.plate] = record
            self._persist(updated)
            self._records = updated

    def _persist(self, records: dict[str, VehicleRecord]) -> None:
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                for record in records.values():
                    fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
            os.replace(tmp, self.path)
        except OSError as exc:
            raise WriteError(f"cannot persist store to {self.path}: {exc}") from exc


def open_store(path: str | Path) -> Store:
    """Load and validate a JSON-lines store; duplicate plates are rejected.

    A missing file opens as an empty store (it is created on first upsert).
    """
    path = Path(path)
    records: dict[str, VehicleRecord] = {}
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            for line_number, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(line_number, f"bad JSON: {exc}") from exc
                try:
                    record = VehicleRecord.from_dict(data)
                except (TypeError, ValueError) as exc:
                    raise ParseError(line_number, str(exc)) from exc
                if record.plate in records:
                    raise DuplicatePlate(record.plate, line_number)
                records[record.plate] = record
    return Store(path, records)
