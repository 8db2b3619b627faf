"""MATPOWER-style case file parsing and result serialization.

Supported subset: ``mpc.baseMVA``, ``mpc.bus``, ``mpc.gen``, ``mpc.branch``.
Everything else in the file is ignored with a logged notice, except constructs
the DC model cannot represent (``mpc.dcline``), which raise UnsupportedFeature.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field

from .errors import ParseError, UnsupportedFeature

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BranchRow:
    id: int
    from_bus: int
    to_bus: int
    susceptance: float  # 1/x, p.u.
    rate_mw: float  # 0 means unlimited


@dataclass
class RawCase:
    name: str
    mva_base: float
    bus_load: dict[int, float]  # bus id -> MW
    gen_output: dict[int, float]  # bus id -> MW, generators summed per bus
    branch_rows: list[BranchRow]
    reference_bus: int | None  # type-3 bus if the file has one

    def __post_init__(self):
        if not self.bus_load:
            raise ParseError("empty bus table")
        if not self.branch_rows:
            raise ParseError("empty branch table")
        for label, values in (("bus", self.bus_load.values()),
                              ("gen", self.gen_output.values())):
            for v in values:
                if not math.isfinite(v):
                    raise ParseError(f"non-finite value in {label} table")


_MATRIX_START = re.compile(r"mpc\.(\w+)\s*=\s*\[")
_SCALAR = re.compile(r"mpc\.(\w+)\s*=\s*([^;\[]+);")

_SUPPORTED_MATRICES = {"bus", "gen", "branch"}
_IGNORED_MATRICES = {"gencost", "bus_name", "gentype", "genfuel", "areas", "branch_name"}


def _strip_comment(line: str) -> str:
    pos = line.find("%")
    return line[:pos] if pos >= 0 else line


def _parse_row(text: str, lineno: int) -> list[float]:
    cleaned = text.replace(";", " ").replace("]", " ").strip()
    if not cleaned:
        return []
    try:
        return [float(tok) for tok in cleaned.replace(",", " ").split()]
    except ValueError as exc:
        raise ParseError(f"malformed row: {text.strip()!r} ({exc})", lineno) from None


def parse_case(text: str, name: str = "") -> RawCase:
    """Parse case file text into raw tables.

    Out-of-service branches and generators (status 0) are dropped; multiple
    generators at one bus are summed; reactance is converted to susceptance.
    """
    mva_base = None
    matrices: dict[str, list[tuple[int, list[float]]]] = {}
    current: str | None = None
    case_name = name

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line)
        if not line.strip():
            continue

        if current is None:
            m = re.search(r"function\s+mpc\s*=\s*(\w+)", line)
            if m and not case_name:
                case_name = m.group(1)
                continue
            m = _MATRIX_START.search(line)
            if m:
                target = m.group(1)
                if target == "dcline":
                    raise UnsupportedFeature("mpc.dcline is outside the supported subset")
                current = target
                matrices.setdefault(current, [])
                rest = line[m.end():]
                if rest.strip():
                    matrices[current].append((lineno, _parse_row(rest, lineno)))
                if "]" in rest:
                    current = None
                continue
            m = _SCALAR.search(line)
            if m:
                key, value = m.group(1), m.group(2).strip()
                if key == "baseMVA":
                    try:
                        mva_base = float(value)
                    except ValueError:
                        raise ParseError(f"bad baseMVA value {value!r}", lineno) from None
                elif key == "version":
                    pass
                else:
                    log.info("ignoring scalar mpc.%s", key)
                continue
        else:
            closing = "]" in line
            row_text = line.split("]")[0]
            row = _parse_row(row_text, lineno)
            if row:
                matrices[current].append((lineno, row))
            if closing:
                current = None

    if mva_base is None:
        raise ParseError("missing mpc.baseMVA")
    for key in matrices:
        if key not in _SUPPORTED_MATRICES and key not in _IGNORED_MATRICES:
            log.info("ignoring matrix mpc.%s", key)
    for key in _SUPPORTED_MATRICES:
        if key not in matrices or not matrices[key]:
            raise ParseError(f"missing mpc.{key} table")

    bus_load: dict[int, float] = {}
    reference_bus = None
    for lineno, row in matrices["bus"]:
        if len(row) < 3:
            raise ParseError("bus row needs at least bus_i, type, Pd", lineno)
        bus_id, bus_type, pd = int(row[0]), int(row[1]), row[2]
        if bus_id in bus_load:
            raise ParseError(f"duplicate bus id {bus_id}", lineno)
        if bus_type == 4:
            log.info("bus %d is isolated (type 4); kept, connectivity checked at build", bus_id)
        bus_load[bus_id] = pd
        if bus_type == 3 and reference_bus is None:
            reference_bus = bus_id

    gen_output: dict[int, float] = {}
    for lineno, row in matrices["gen"]:
        if len(row) < 2:
            raise ParseError("gen row needs at least bus, Pg", lineno)
        bus_id, pg = int(row[0]), row[1]
        status = row[7] if len(row) > 7 else 1.0
        if status <= 0:
            log.info("dropping out-of-service generator at bus %d", bus_id)
            continue
        if bus_id not in bus_load:
            raise ParseError(f"generator at unknown bus {bus_id}", lineno)
        gen_output[bus_id] = gen_output.get(bus_id, 0.0) + pg

    branch_rows: list[BranchRow] = []
    branch_no = 0
    for lineno, row in matrices["branch"]:
        if len(row) < 4:
            raise ParseError("branch row needs at least fbus, tbus, r, x", lineno)
        branch_no += 1
        fbus, tbus, x = int(row[0]), int(row[1]), row[3]
        rate = row[5] if len(row) > 5 else 0.0
        status = row[10] if len(row) > 10 else 1.0
        if status <= 0:
            log.info("dropping out-of-service branch %d-%d", fbus, tbus)
            continue
        if x == 0:
            raise ParseError(f"branch {fbus}-{tbus} has zero reactance", lineno)
        branch_rows.append(BranchRow(
            id=branch_no, from_bus=fbus, to_bus=tbus,
            susceptance=1.0 / x, rate_mw=rate,
        ))

    return RawCase(
        name=case_name, mva_base=mva_base, bus_load=bus_load,
        gen_output=gen_output, branch_rows=branch_rows, reference_bus=reference_bus,
    )


def load_case(path) -> RawCase:
    with open(path) as fh:
        text = fh.read()
    return parse_case(text)


@dataclass
class ResultDocument:
    """Machine-readable record of one solve run."""

    case: str
    tlf: float
    status: str
    objective: float | None = None
    openings: list[int] | None = None
    loss_of_load: dict[int, float] = field(default_factory=dict)
    structural_risk: float | None = None
    timings_ms: dict[str, float] = field(default_factory=dict)
    iterations: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        doc = {
            "case": self.case,
            "tlf": self.tlf,
            "status": self.status,
            "objective": self.objective,
            "loss_of_load": {str(k): v for k, v in sorted(self.loss_of_load.items())},
            "structural_risk": self.structural_risk,
            "timings_ms": dict(sorted(self.timings_ms.items())),
            "iterations": self.iterations,
        }
        if self.openings is not None:
            doc["openings"] = sorted(self.openings)
        return doc


def write_result(doc: ResultDocument, format: str = "json") -> str:
    """Serialize a result document; output is byte-stable for equal inputs."""
    if format == "json":
        return json.dumps(doc.to_dict(), sort_keys=True, indent=2) + "\n"
    if format == "csv-summary":
        openings = "" if doc.openings is None else ";".join(str(e) for e in sorted(doc.openings))
        objective = "" if doc.objective is None else f"{doc.objective:.6g}"
        total_ms = sum(doc.timings_ms.values())
        return (
            "case,tlf,status,objective,openings,time_ms\n"
            f"{doc.case},{doc.tlf:g},{doc.status},{objective},{openings},{total_ms:.1f}\n"
        )
    raise ValueError(f"unknown format {format!r}")
