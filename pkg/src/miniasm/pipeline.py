"""Phase/pipeline engine: append-only shared data object with snapshot
branching, XML pipeline configuration, phase registry and runner.

The data object is the shared vocabulary of all phases. Phases only ever add
keys; re-computation with different parameters is expressed by branching from
a snapshot, never by overwriting.
"""

from __future__ import annotations

import threading
import time
import uuid
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence


class OverwriteViolation(Exception):
    """A phase tried to overwrite or shadow an existing key."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"key {key!r} is already present and may not be overwritten")


class MissingKey(KeyError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(key)


class UnknownSnapshot(KeyError):
    pass


class UnknownPhase(KeyError):
    pass


class XmlSyntax(ValueError):
    def __init__(self, line: int, message: str = "XML syntax error"):
        self.line = line
        super().__init__(f"{message} at line {line}")


class MissingPipelineName(ValueError):
    pass


class EmptyPipeline(ValueError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"pipeline {name!r} defines no phases")


class DuplicatePipeline(ValueError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"pipeline {name!r} is defined more than once")


@dataclass(frozen=True)
class PhaseReport:
    """Execution record of one phase run."""

    phase_name: str
    started_at: float
    wall_millis: int
    keys_added: tuple
    log: tuple
    status: str  # "ok" or "failed(<reason>)"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {
            "phaseName": self.phase_name,
            "startedAt": self.started_at,
            "wallMillis": self.wall_millis,
            "keysAdded": list(self.keys_added),
            "log": list(self.log),
            "status": self.status,
            "ok": self.ok,
        }


class _Snapshot:
    __slots__ = ("id", "entries", "lineage")

    def __init__(self, entries: dict, lineage: tuple):
        self.id = uuid.uuid4().hex
        self.entries = MappingProxyType(dict(entries))
        self.lineage = lineage


_SNAPSHOTS: dict[str, _Snapshot] = {}
_SNAPSHOT_LOCK = threading.Lock()


class DataObject:
    """Append-only keyed store shared across phases.

    Visible entries are own entries plus everything from the snapshot the
    object was branched from; own keys never shadow ancestor keys.
    """

    __slots__ = ("_entries", "_parent", "lineage")

    def __init__(self, _parent: Optional[_Snapshot] = None):
        self._entries: dict[str, Any] = {}
        self._parent = _parent
        self.lineage: list[PhaseReport] = list(_parent.lineage) if _parent else []

    def has(self, key: str) -> bool:
        return key in self._entries or (self._parent is not None and key in self._parent.entries)

    def put(self, key: str, value: Any) -> "DataObject":
        if self.has(key):
            raise OverwriteViolation(key)
        self._entries[key] = value
        return self

    def get(self, key: str) -> Any:
        if key in self._entries:
            return self._entries[key]
        if self._parent is not None and key in self._parent.entries:
            return self._parent.entries[key]
        raise MissingKey(key)

    def keys(self) -> list[str]:
        own = list(self._entries)
        if self._parent is None:
            return own
        return list(self._parent.entries) + own

    def items(self) -> dict[str, Any]:
        merged: dict[str, Any] = {}
        if self._parent is not None:
            merged.update(self._parent.entries)
        merged.update(self._entries)
        return merged

    def snapshot(self) -> str:
        """Freeze the current visible state and return an opaque snapshot id."""
        snap = _Snapshot(self.items(), tuple(self.lineage))
        with _SNAPSHOT_LOCK:
            _SNAPSHOTS[snap.id] = snap
        return snap.id

    @classmethod
    def branch(cls, snapshot_id: str) -> "DataObject":
        with _SNAPSHOT_LOCK:
            snap = _SNAPSHOTS.get(snapshot_id)
        if snap is None:
            raise UnknownSnapshot(snapshot_id)
        return cls(_parent=snap)


def snapshot(d: DataObject) -> str:
    return d.snapshot()


def branch(snapshot_id: str) -> DataObject:
    return DataObject.branch(snapshot_id)


@dataclass(frozen=True)
class PhaseSpec:
    name: str
    params: Mapping[str, str] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, PhaseSpec):
            return NotImplemented
        return self.name == other.name and dict(self.params) == dict(other.params)


@dataclass(frozen=True)
class PipelineSpec:
    name: str
    phases: tuple

    def __eq__(self, other):
        if not isinstance(other, PipelineSpec):
            return NotImplemented
        return self.name == other.name and list(self.phases) == list(other.phases)


class Phase:
    """Base class for phases.

    Subclasses declare ``name``, ``requires``, ``provides`` and parameter
    ``defaults``, and implement ``run(data, params, log)``. ``run`` must only
    add keys to the data object.
    """

    name: str = ""
    requires: frozenset = frozenset()
    provides: frozenset = frozenset()
    defaults: Mapping[str, Any] = {}

    def run(self, data: DataObject, params: Mapping[str, Any], log: Callable[[str], None]) -> None:
        raise NotImplementedError


class PhaseRegistry:
    """Case-sensitive mapping from fully qualified phase names to instances."""

    def __init__(self):
        self._phases: dict[str, Phase] = {}

    def register(self, phase: Phase) -> None:
        self._phases[phase.name] = phase

    def resolve(self, name: str) -> Phase:
        try:
            return self._phases[name]
        except KeyError:
            raise UnknownPhase(name) from None

    def names(self) -> list[str]:
        return sorted(self._phases)


def run_phase(
    phase: Phase,
    data: DataObject,
    params: Optional[Mapping[str, Any]] = None,
) -> PhaseReport:
    """Run one phase with contract checks.

    Missing preconditions or postconditions, exceptions and append-only
    violations all end up in the report status; nothing is silently dropped.
    """
    started = time.time()
    log_lines: list[str] = []
    merged: dict[str, Any] = dict(phase.defaults)
    if params:
        merged.update(params)

    def log(line: str) -> None:
        log_lines.append(line)

    before_keys = set(data.keys())
    missing = sorted(phase.requires - before_keys)
    if missing:
        report = PhaseReport(
            phase.name, started, 0, (), tuple(log_lines),
            f"failed(precondition: {', '.join(missing)})",
        )
        data.lineage.append(report)
        return report

    before = data.items()
    status = "ok"
    try:
        phase.run(data, merged, log)
    except OverwriteViolation as exc:
        status = f"failed(OverwriteViolation: {exc.key})"
    except Exception as exc:  # a failing phase is a domain outcome, not a crash
        status = f"failed({type(exc).__name__}: {exc})"

    after = data.items()
    removed = [k for k in before if k not in after]
    mutated = [k for k in before if k in after and after[k] is not before[k]]
    if removed or mutated:
        offenders = ", ".join(sorted(removed + mutated))
        status = f"failed(OverwriteViolation: {offenders})"
    elif status == "ok":
        missing_post = sorted(k for k in phase.provides if k not in after)
        if missing_post:
            status = f"failed(postcondition: {', '.join(missing_post)})"

    keys_added = tuple(k for k in data.keys() if k not in before_keys)
    wall = int((time.time() - started) * 1000)
    report = PhaseReport(phase.name, started, wall, keys_added, tuple(log_lines), status)
    data.lineage.append(report)
    return report


def run_pipeline(
    spec: PipelineSpec,
    data: DataObject,
    registry: PhaseRegistry,
) -> list[PhaseReport]:
    """Run all phases of ``spec`` in order, stopping at the first failure.

    All phase names are resolved before anything runs, so a typo anywhere in
    the pipeline aborts it with UnknownPhase without side effects.
    """
    resolved = [(registry.resolve(ps.name), ps.params) for ps in spec.phases]
    reports: list[PhaseReport] = []
    for phase, params in resolved:
        report = run_phase(phase, data, params)
        reports.append(report)
        if not report.ok:
            break
    return reports


def parse_settings(xml_text: str) -> list[PipelineSpec]:
    """Parse a settings document into pipeline specs, preserving phase order.

    Expected shape::

        <settings>
          <pipeline name="default">
            <phase>miniasm.ScanReadsPhase</phase>
            <phase>miniasm.FindRepeatsPhase
              <param name="minTotLen" value="20"/>
            </phase>
          </pipeline>
        </settings>
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise XmlSyntax(exc.position[0]) from None
    if root.tag != "settings":
        raise XmlSyntax(1, f"expected root element 'settings', got {root.tag!r}")
    specs: list[PipelineSpec] = []
    seen: set[str] = set()
    for pipe in root.findall("pipeline"):
        name = pipe.get("name")
        if name is None:
            raise MissingPipelineName("pipeline element has no 'name' attribute")
        if name in seen:
            raise DuplicatePipeline(name)
        seen.add(name)
        phases = []
        for ph in pipe.findall("phase"):
            phase_name = (ph.text or "").strip()
            params = {p.get("name"): p.get("value") for p in ph.findall("param")}
            phases.append(PhaseSpec(phase_name, params))
        if not phases:
            raise EmptyPipeline(name)
        specs.append(PipelineSpec(name, tuple(phases)))
    return specs


def serialize_settings(specs: Sequence[PipelineSpec]) -> str:
    """Render pipeline specs back to a settings XML document.

    parse_settings(serialize_settings(specs)) == specs on the model.
    """
    lines = ["<settings>"]
    for spec in specs:
        lines.append(f'  <pipeline name="{spec.name}">')
        for ph in spec.phases:
            if ph.params:
                lines.append(f"    <phase>{ph.name}")
            else:
                lines.append(f"    <phase>{ph.name}</phase>")
            if ph.params:
                for pname, pval in ph.params.items():
                    lines.append(f'      <param name="{pname}" value="{pval}"/>')
                lines.append("    </phase>")
        lines.append("  </pipeline>")
    lines.append("</settings>")
    return "\n".join(lines) + "\n"
