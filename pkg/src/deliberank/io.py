"""Reading datasets, scenario and config files; writing JSON artifacts.

Tables are CSV with a header row or JSON lines, chosen by file extension
(``.csv`` vs ``.jsonl``/``.json``). Timestamps are integer epoch seconds.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .holistic import HolisticMethod
from .integrated import APPROVAL_COUNT, IntegratedConfig
from .metrics import Geometric, TopK
from .model import (
    ApprovalProfile,
    EvaluationEvent,
    InspectionStats,
    Proposal,
    RankedList,
    build_profile,
    s100_events,
    scenario_s100,
)
from .simulator import AllAtStart, Burst, GroupSpec, Scenario, UniformOverHorizon

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "DataError",
    "Dataset",
    "load_dataset",
    "load_dataset_dir",
    "load_scenario",
    "load_integrated_config",
    "dumps_json",
    "read_ranked_list",
    "write_s100_fixture",
    "DATA_DIR",
]

DATA_DIR = Path(__file__).parent / "data"


class DataError(Exception):
    """Bad input data, located by file, line and column where known."""

    def __init__(self, message: str, path=None, line: int | None = None, column: int | None = None):
        self.path, self.line, self.column = path, line, column
        where = str(path) if path is not None else "<input>"
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Dataset:
    proposals: tuple
    events: tuple
    views: InspectionStats | None = None

    def profile(self) -> ApprovalProfile:
        return build_profile(self.events, self.proposals)

    @property
    def inspections(self) -> InspectionStats:
        return self.views if self.views is not None else InspectionStats()


def _rows(path: Path) -> Iterator[tuple[int, dict, list[str] | None]]:
    """Yield (line, record, header) for CSV or JSON-lines files."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open: {exc.strerror}", path) from exc
    with fh:
        if path.suffix.lower() == ".csv":
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            try:
                for row in reader:
                    if None in row:
                        raise DataError("too many fields", path, reader.line_num, len(header) + 1)
                    yield reader.line_num, row, header
            except csv.Error as exc:
                raise DataError(f"malformed CSV: {exc}", path, reader.line_num) from exc
        else:
            for lineno, text in enumerate(fh, start=1):
                if not text.strip():
                    continue
                try:
                    record = json.loads(text)
                except json.JSONDecodeError as exc:
                    raise DataError(exc.msg, path, lineno, exc.colno) from exc
                if not isinstance(record, dict):
                    raise DataError("expected a JSON object", path, lineno, 1)
                yield lineno, record, None


class _Row:
    def __init__(self, path, line, record, header):
        self.path, self.line, self.record, self.header = path, line, record, header

    def _col(self, name):
        if self.header and name in self.header:
            return self.header.index(name) + 1
        return None

    def error(self, name, message):
        return DataError(f"column {name!r}: {message}", self.path, self.line, self._col(name))

    def get(self, name, default=None, required=False):
        value = self.record.get(name)
        if value is None or value == "":
            if required:
                raise self.error(name, "missing value")
            return default
        return value

    def integer(self, name, default=None, required=False):
        value = self.get(name, default, required)
        if value is None or isinstance(value, int) and not isinstance(value, bool):
            return value
        try:
            return int(str(value).strip())
        except ValueError:
            raise self.error(name, f"expected an integer, got {value!r}") from None

    def number(self, name):
        value = self.get(name)
        if value is None or isinstance(value, (int, float)) and not isinstance(value, bool):
            return value
        try:
            return float(value)
        except ValueError:
            raise self.error(name, f"expected a number, got {value!r}") from None


def _read_table(path: Path, required: tuple[str, ...]) -> Iterator[_Row]:
    for line, record, header in _rows(path):
        if header is not None:
            missing = [c for c in required if c not in header]
            if missing:
                raise DataError(f"missing column(s): {', '.join(missing)}", path, 1)
        yield _Row(path, line, record, header)


def _parse_tags(value) -> frozenset:
    if value is None:
        return frozenset()
    if isinstance(value, list):
        return frozenset(str(t) for t in value if str(t))
    return frozenset(t.strip() for t in str(value).split(";") if t.strip())


def load_dataset(proposals_path, events_path, views_path=None) -> Dataset:
    """Load proposals, evaluation events and optional view counts.

    Raises :class:`DataError` on parse errors and dangling references.
    """
    proposals_path, events_path = Path(proposals_path), Path(events_path)
    proposals: list[Proposal] = []
    seen: set[str] = set()
    for row in _read_table(proposals_path, ("id", "submitted_at")):
        pid = str(row.get("id", required=True))
        if pid in seen:
            raise row.error("id", f"duplicate proposal id {pid!r}")
        seen.add(pid)
        cost = row.number("cost")
        try:
            proposals.append(
                Proposal(
                    id=pid,
                    title=str(row.get("title", "")),
                    body=str(row.get("body", "")),
                    tags=_parse_tags(row.get("tags")),
                    cost=cost,
                    author=str(row.get("author", "")),
                    submitted_at=row.integer("submitted_at", required=True),
                    comment_count=row.integer("comment_count", 0),
                )
            )
        except ValueError as exc:
            raise DataError(str(exc), proposals_path, row.line) from exc

    events: list[EvaluationEvent] = []
    for row in _read_table(events_path, ("user", "proposal", "polarity", "at")):
        pid = str(row.get("proposal", required=True))
        if pid not in seen:
            raise row.error("proposal", f"unknown proposal id {pid!r}")
        polarity = row.integer("polarity", required=True)
        if polarity not in (1, -1):
            raise row.error("polarity", f"must be +1 or -1, got {polarity!r}")
        events.append(
            EvaluationEvent(
                user=str(row.get("user", required=True)),
                proposal=pid,
                polarity=polarity,
                at=row.integer("at", required=True),
            )
        )

    views = None
    if views_path is not None:
        counts: dict[str, int] = {}
        for row in _read_table(Path(views_path), ("proposal", "views")):
            pid = str(row.get("proposal", required=True))
            if pid not in seen:
                raise row.error("proposal", f"unknown proposal id {pid!r}")
            n = row.integer("views", required=True)
            if n < 0:
                raise row.error("views", "must be non-negative")
            counts[pid] = n
        views = InspectionStats(counts)
    return Dataset(tuple(proposals), tuple(events), views)


def _find(directory: Path, stem: str, required: bool) -> Path | None:
    for ext in (".csv", ".jsonl", ".json"):
        candidate = directory / f"{stem}{ext}"
        if candidate.exists():
            return candidate
    if required:
        raise DataError(f"no {stem}.csv or {stem}.jsonl found", directory)
    return None


def load_dataset_dir(directory) -> Dataset:
    """Load ``proposals``, ``events`` and optional ``views`` tables from a directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError("not a directory", directory)
    return load_dataset(
        _find(directory, "proposals", True),
        _find(directory, "events", True),
        _find(directory, "views", False),
    )


def _load_toml(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise DataError(f"cannot open: {exc.strerror}", path) from exc
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"invalid TOML: {exc}", path) from exc


_SCENARIO_KEYS = {
    "n_users", "groups", "arrivals", "burst_times", "horizon", "sessions_per_tick",
    "attention", "attention_p", "attention_k", "resort_every", "ticks_per_day",
    "preseed", "coverage_k",
}


def scenario_from_mapping(data: dict, path=None) -> Scenario:
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise DataError(f"unknown scenario key(s): {', '.join(sorted(unknown))}", path)
    try:
        groups = tuple(GroupSpec(*g) for g in data["groups"])
        kind = data.get("arrivals", "all_at_start")
        if kind == "all_at_start":
            arrivals = AllAtStart()
        elif kind == "uniform":
            arrivals = UniformOverHorizon()
        elif kind == "burst":
            arrivals = Burst(tuple(data.get("burst_times", (0,))))
        else:
            raise ValueError(f"arrivals must be all_at_start, uniform or burst, got {kind!r}")
        model = data.get("attention", "geometric")
        if model == "geometric":
            attention = Geometric(float(data.get("attention_p", 0.7)))
        elif model == "topk":
            attention = TopK(int(data.get("attention_k", 10)))
        else:
            raise ValueError(f"attention must be geometric or topk, got {model!r}")
        return Scenario(
            n_users=int(data["n_users"]),
            groups=groups,
            arrivals=arrivals,
            horizon=int(data.get("horizon", 30)),
            sessions_per_tick=int(data.get("sessions_per_tick", 20)),
            attention=attention,
            resort_every=int(data.get("resort_every", 1)),
            ticks_per_day=int(data.get("ticks_per_day", 1)),
            preseed=bool(data.get("preseed", False)),
            coverage_k=int(data.get("coverage_k", 10)),
        )
    except KeyError as exc:
        raise DataError(f"missing scenario key {exc.args[0]!r}", path) from exc
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid scenario: {exc}", path) from exc


def load_scenario(path) -> Scenario:
    return scenario_from_mapping(_load_toml(path), path)


def load_integrated_config(path) -> IntegratedConfig:
    """Read ``min_views``, ``z``, ``base``, ``tag_window`` and ``author_cap``."""
    data = _load_toml(path)
    allowed = {"min_views", "z", "base", "tag_window", "author_cap"}
    unknown = set(data) - allowed
    if unknown:
        raise DataError(f"unknown config key(s): {', '.join(sorted(unknown))}", path)
    base = data.get("base", APPROVAL_COUNT)
    try:
        return IntegratedConfig(
            min_views=int(data.get("min_views", IntegratedConfig.min_views)),
            z=float(data.get("z", IntegratedConfig.z)),
            base=base if base == APPROVAL_COUNT else HolisticMethod(base),
            tag_window=int(data.get("tag_window", 1)),
            author_cap=data.get("author_cap"),
        )
    except ValueError as exc:
        raise DataError(f"invalid config: {exc}", path) from exc


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def read_ranked_list(path) -> RankedList:
    with open(path, encoding="utf-8") as fh:
        return RankedList.from_dict(json.load(fh))


def write_s100_fixture(directory) -> None:
    """Write the S100 proposals and events as CSV files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    proposals, _ = scenario_s100()
    with open(directory / "proposals.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "title", "author", "submitted_at", "tags", "cost", "comment_count"])
        for p in proposals:
            w.writerow([p.id, p.title, p.author, int(p.submitted_at), ";".join(sorted(p.tags)), "", p.comment_count])
    with open(directory / "events.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "proposal", "polarity", "at"])
        for ev in s100_events():
            w.writerow([ev.user, ev.proposal, ev.polarity, int(ev.at)])
