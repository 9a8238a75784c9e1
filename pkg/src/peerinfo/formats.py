"""Readers and writers for every file the toolkit consumes or emits.

CSV files follow RFC 4180 (CRLF line ends, minimal quoting) and floats are
written with 9 significant digits, so each writer's output reads back to
the same objects and re-serialises to the same bytes. Readers collect every
offending row before raising.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from peerinfo.classifier import WorkerType
from peerinfo.elicitation import (
    BONUS_CENTS,
    SCHEDULE_SCENARIOS,
    BdmOutcome,
    PerformanceBin,
    TreatmentArm,
    WtpSchedule,
)
from peerinfo.models import Scenario
from peerinfo.simulator import MODEL_KINDS, EffectRow, EffectTable, WorkerRecord

__all__ = [
    "EmbeddingMatrix",
    "ParseError",
    "format_float",
    "read_assignments",
    "read_effects",
    "read_embeddings",
    "read_policy_report",
    "read_schedules",
    "read_workers",
    "write_assignments",
    "write_effects",
    "write_embeddings",
    "write_policy_report",
    "write_schedules",
    "write_workers",
]


class ParseError(ValueError):
    """Malformed input; ``problems`` lists ``(line, message)`` pairs."""

    def __init__(self, path: str | Path, problems: Sequence[tuple[int, str]]):
        self.path = str(path)
        self.problems = list(problems)
        lines = "\n".join(f"  {self.path}:{line}: {msg}" for line, msg in self.problems)
        super().__init__(f"{len(self.problems)} problem(s) in {self.path}:\n{lines}")


def format_float(x: float | None) -> str:
    if x is None:
        return ""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    return "%.9g" % x


def _round9(x: float | None) -> float | None:
    return None if x is None else float(format_float(x))


def _write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_bytes(buf.getvalue().encode("utf-8"))


def _read_csv(path: str | Path, header: Sequence[str]) -> list[tuple[int, list[str]]]:
    """Rows (with their 1-based line numbers) after checking the header."""
    text = Path(path).read_bytes().decode("utf-8")
    reader = csv.reader(io.StringIO(text, newline=""))
    rows = []
    for row in reader:
        rows.append((reader.line_num, row))
    if not rows or rows[0][1] != list(header):
        found = rows[0][1] if rows else []
        raise ParseError(path, [(1, f"expected header {','.join(header)}, found {','.join(found)}")])
    body = [(n, r) for n, r in rows[1:] if r]
    for n, r in body:
        if len(r) != len(header):
            raise ParseError(path, [(n, f"expected {len(header)} fields, found {len(r)}")])
    return body


def _int(text: str, lo: int | None = None, hi: int | None = None) -> int:
    v = int(text)
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        raise ValueError(f"{v} outside [{lo}, {hi}]")
    return v


def _bool01(text: str) -> bool:
    if text not in ("0", "1"):
        raise ValueError(f"expected 0 or 1, found {text!r}")
    return text == "1"


def _opt(text: str, parse):
    return None if text == "" else parse(text)


# --- schedules --------------------------------------------------------------

SCHEDULE_HEADER = ("worker_id", "scenario", "bin", "prefer_info", "wtp_cents")


def write_schedules(path: str | Path, schedules: Iterable[WtpSchedule]) -> None:
    rows = []
    for sch in schedules:
        for s in SCHEDULE_SCENARIOS:
            for b in PerformanceBin:
                rows.append((sch.worker_id, s.value, b.value, int(sch.prefer[(s, b)]), sch.cents[(s, b)]))
    _write_csv(path, SCHEDULE_HEADER, rows)


def read_schedules(path: str | Path) -> dict[str, WtpSchedule]:
    """Schedules keyed by worker id, in order of first appearance."""
    problems: list[tuple[int, str]] = []
    prefer: dict[str, dict] = {}
    cents: dict[str, dict] = {}
    first_line: dict[str, int] = {}
    for n, (wid, scen, bin_, pref, wtp) in _read_csv(path, SCHEDULE_HEADER):
        try:
            if not wid:
                raise ValueError("empty worker_id")
            key = (Scenario(scen), PerformanceBin(_int(bin_)))
            if key[0] not in SCHEDULE_SCENARIOS:
                raise ValueError(f"scenario must be exante or expost, found {scen!r}")
            p, c = _bool01(pref), _int(wtp, 0, BONUS_CENTS)
        except ValueError as exc:
            problems.append((n, str(exc)))
            continue
        first_line.setdefault(wid, n)
        if key in cents.setdefault(wid, {}):
            problems.append((n, f"duplicate entry for worker {wid!r}, {key[0].value} bin {key[1].value}"))
            continue
        prefer.setdefault(wid, {})[key] = p
        cents[wid][key] = c
    out = {}
    for wid in first_line:
        missing = 18 - len(cents[wid])
        if missing:
            problems.append((first_line[wid], f"incomplete schedule for worker {wid!r}: {missing} of 18 entries missing"))
            continue
        out[wid] = WtpSchedule(prefer[wid], cents[wid], wid)
    if problems:
        raise ParseError(path, sorted(problems))
    return out


# --- embeddings -------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple[str, ...]
    X: np.ndarray

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or X.shape[0] != len(self.ids):
            raise ValueError("embedding rows must align with ids")
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise ValueError(f"need at least 2 rows and 1 column, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("embeddings must be finite")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate worker ids in embeddings")
        object.__setattr__(self, "X", X)


def write_embeddings(path: str | Path, emb: EmbeddingMatrix) -> None:
    buf = io.StringIO()
    buf.write(f"d={emb.X.shape[1]}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    for wid, row in zip(emb.ids, emb.X):
        writer.writerow([wid, *map(format_float, row)])
    Path(path).write_bytes(buf.getvalue().encode("utf-8"))


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    text = Path(path).read_bytes().decode("utf-8")
    lines = io.StringIO(text, newline="")
    head = lines.readline().rstrip("\r\n")
    try:
        if not head.startswith("d="):
            raise ValueError
        d = int(head[2:])
        if d < 1:
            raise ValueError
    except ValueError:
        raise ParseError(path, [(1, f"expected header 'd=<positive int>', found {head!r}")]) from None
    problems, ids, rows = [], [], []
    reader = csv.reader(lines)
    seen = set()
    for row in reader:
        n = reader.line_num + 1
        if not row:
            continue
        if len(row) != d + 1:
            problems.append((n, f"expected worker id and {d} values, found {len(row) - 1} values"))
            continue
        try:
            vals = [float(v) for v in row[1:]]
        except ValueError as exc:
            problems.append((n, str(exc)))
            continue
        if not all(math.isfinite(v) for v in vals):
            problems.append((n, "non-finite value"))
            continue
        if row[0] in seen:
            problems.append((n, f"duplicate worker id {row[0]!r}"))
            continue
        seen.add(row[0])
        ids.append(row[0])
        rows.append(vals)
    if not problems and len(rows) < 2:
        problems.append((1, f"need at least 2 embedding rows, found {len(rows)}"))
    if problems:
        raise ParseError(path, problems)
    return EmbeddingMatrix(tuple(ids), np.array(rows, dtype=float))


# --- worker records ---------------------------------------------------------

WTP_COLUMNS = tuple(f"{s.value}_{b.value}" for s in SCHEDULE_SCENARIOS for b in PerformanceBin)
BDM_COLUMNS = (
    "bdm_scenario",
    "bdm_coin_direct",
    "bdm_draw",
    "bdm_implemented",
    "bdm_payment_cents",
    "bdm_receives_info",
)
WORKER_HEADER = ("worker_id", "model", "type", "arm", "e1", "e2", "bin", "cluster", *WTP_COLUMNS, *BDM_COLUMNS)


def _b01(x: bool | None) -> str:
    return "" if x is None else str(int(x))


def write_workers(path: str | Path, records: Iterable[WorkerRecord]) -> None:
    """Schedule columns hold signed WTP (``exante_1`` .. ``expost_9``)."""
    rows = []
    for r in records:
        o = r.bdm
        rows.append(
            (
                r.worker_id,
                r.model,
                int(r.type),
                "" if r.arm is None else r.arm.value,
                r.e1,
                "" if r.e2 is None else r.e2,
                r.bin.value,
                "" if r.cluster is None else r.cluster,
                *r.schedule.to_array().tolist(),
                "" if r.bdm_scenario is None else r.bdm_scenario.value,
                _b01(r.bdm_coin_direct),
                "" if r.bdm_draw is None else r.bdm_draw,
                _b01(None if o is None else o.implemented),
                "" if o is None else o.payment_cents,
                _b01(None if o is None else o.receives_info),
            )
        )
    _write_csv(path, WORKER_HEADER, rows)


def read_workers(path: str | Path) -> list[WorkerRecord]:
    problems, out, seen = [], [], set()
    for n, row in _read_csv(path, WORKER_HEADER):
        f = dict(zip(WORKER_HEADER, row))
        try:
            wid = f["worker_id"]
            if not wid or wid in seen:
                raise ValueError(f"missing or duplicate worker_id {wid!r}")
            if f["model"] not in MODEL_KINDS:
                raise ValueError(f"unknown model {f['model']!r}")
            signed = [_int(f[c], -BONUS_CENTS, BONUS_CENTS) for c in WTP_COLUMNS]
            bdm_parts = [f[c] for c in BDM_COLUMNS]
            if any(bdm_parts) and not all(p != "" for p in bdm_parts):
                raise ValueError("BDM fields must be all present or all empty")
            outcome = None
            if bdm_parts[0]:
                outcome = BdmOutcome(_bool01(f["bdm_implemented"]), _int(f["bdm_payment_cents"], 0, BONUS_CENTS), _bool01(f["bdm_receives_info"]))
            rec = WorkerRecord(
                worker_id=wid,
                model=f["model"],
                e1=_int(f["e1"], 0),
                schedule=WtpSchedule.from_array(signed, wid),
                bin=PerformanceBin(_int(f["bin"])),
                type=WorkerType(_int(f["type"])),
                arm=_opt(f["arm"], TreatmentArm),
                e2=_opt(f["e2"], lambda t: _int(t, 0)),
                cluster=_opt(f["cluster"], lambda t: _int(t, 0)),
                bdm_scenario=_opt(f["bdm_scenario"], Scenario),
                bdm_coin_direct=_opt(f["bdm_coin_direct"], _bool01),
                bdm_draw=_opt(f["bdm_draw"], lambda t: _int(t, 0, BONUS_CENTS)),
                bdm=outcome,
            )
        except ValueError as exc:
            problems.append((n, str(exc)))
            continue
        seen.add(wid)
        out.append(rec)
    if problems:
        raise ParseError(path, problems)
    return out


# --- id -> label files (classification, clusters) ---------------------------


def write_assignments(path: str | Path, column: str, labels: Iterable[tuple[str, int]]) -> None:
    _write_csv(path, ("worker_id", column), [(wid, int(v)) for wid, v in labels])


def read_assignments(path: str | Path, column: str, lo: int = 0, hi: int | None = None) -> dict[str, int]:
    problems, out = [], {}
    for n, (wid, v) in _read_csv(path, ("worker_id", column)):
        try:
            if not wid or wid in out:
                raise ValueError(f"missing or duplicate worker_id {wid!r}")
            out[wid] = _int(v, lo, hi)
        except ValueError as exc:
            problems.append((n, str(exc)))
    if problems:
        raise ParseError(path, problems)
    return out


# --- effects ----------------------------------------------------------------

EFFECT_HEADER = ("grouping", "subgroup", "arm", "effect", "se", "n_arm", "n_control", "n_excluded", "control_mean_change")


def write_effects(path: str | Path, table: EffectTable, fmt: str = "csv") -> None:
    rows = []
    for r in table.rows:
        excluded = table.sizes[r.subgroup][TreatmentArm.CHOOSE_YOUR_INFO]
        rows.append((table.grouping, r.subgroup, r.arm.value, r.effect, r.se, r.n_arm, r.n_control, excluded, r.control_mean_change))
    _write_table(path, EFFECT_HEADER, rows, fmt)


def read_effects(path: str | Path, fmt: str = "csv") -> EffectTable:
    problems, rows, sizes, grouping = [], [], {}, None
    for n, f in _read_table(path, EFFECT_HEADER, fmt):
        try:
            grouping = f["grouping"] if grouping is None else grouping
            if f["grouping"] != grouping:
                raise ValueError("mixed groupings in one file")
            arm = TreatmentArm(f["arm"])
            if arm not in (TreatmentArm.EX_ANTE_INFO, TreatmentArm.EX_POST_INFO):
                raise ValueError(f"effects are only reported for information arms, found {arm.value!r}")
            counts = [_as_int(f[k]) for k in ("n_arm", "n_control", "n_excluded")]
            if min(counts) < 0:
                raise ValueError("negative group size")
            row = EffectRow(f["subgroup"], arm, _as_float(f["effect"]), _as_float(f["se"]), counts[0], counts[1], _as_float(f["control_mean_change"]))
        except (ValueError, TypeError) as exc:
            problems.append((n, str(exc)))
            continue
        rows.append(row)
        sz = sizes.setdefault(row.subgroup, {a: 0 for a in TreatmentArm})
        sz[arm], sz[TreatmentArm.CONTROL], sz[TreatmentArm.CHOOSE_YOUR_INFO] = counts[0], counts[1], counts[2]
    if problems:
        raise ParseError(path, problems)
    return EffectTable(grouping or "all", tuple(rows), sizes)


# --- policy report ----------------------------------------------------------


def policy_header() -> tuple[str, ...]:
    per_type = [f"type{int(t)}_{k}" for t in WorkerType for k in ("mean", "n")]
    return ("policy", "mean", "n", *per_type, "gain_vs_uniform_exante", "gain_vs_uniform_expost")


def write_policy_report(path: str | Path, rows: Sequence[Mapping[str, Any]], fmt: str = "csv") -> None:
    header = policy_header()
    _write_table(path, header, [[r[k] for k in header] for r in rows], fmt)


def read_policy_report(path: str | Path, fmt: str = "csv") -> list[dict]:
    header = policy_header()
    problems, out = [], []
    for n, f in _read_table(path, header, fmt):
        try:
            row = {}
            for k in header:
                if k == "policy":
                    row[k] = str(f[k])
                elif k == "n" or k.endswith("_n"):
                    row[k] = _as_int(f[k])
                else:
                    row[k] = _as_float(f[k])
        except (ValueError, TypeError) as exc:
            problems.append((n, str(exc)))
            continue
        out.append(row)
    if problems:
        raise ParseError(path, problems)
    return out


# --- shared csv / jsonl tables ----------------------------------------------


def _cell(v: Any) -> Any:
    if v is None or isinstance(v, (str, bool)) or isinstance(v, (int, np.integer)):
        return v if not isinstance(v, np.integer) else int(v)
    return _round9(float(v))


def _write_table(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]], fmt: str) -> None:
    if fmt == "csv":
        _write_csv(path, header, [[_csv_cell(v) for v in r] for r in rows])
    elif fmt == "jsonl":
        lines = [json.dumps(dict(zip(header, map(_cell, r))), allow_nan=False) for r in rows]
        Path(path).write_bytes("".join(line + "\n" for line in lines).encode("utf-8"))
    else:
        raise ValueError(f"format must be 'csv' or 'jsonl', got {fmt!r}")


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (str, int, np.integer)) and not isinstance(v, bool):
        return str(v)
    return format_float(float(v))


def _read_table(path: str | Path, header: Sequence[str], fmt: str) -> list[tuple[int, dict]]:
    if fmt == "csv":
        return [(n, {k: (v if v != "" else None) for k, v in zip(header, r)}) for n, r in _read_csv(path, header)]
    if fmt != "jsonl":
        raise ValueError(f"format must be 'csv' or 'jsonl', got {fmt!r}")
    out = []
    for n, line in enumerate(Path(path).read_bytes().decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(path, [(n, f"invalid JSON: {exc.msg}")]) from None
        if not isinstance(obj, dict) or list(obj) != list(header):
            raise ParseError(path, [(n, f"expected keys {','.join(header)}")])
        out.append((n, obj))
    return out


def _as_int(v: Any) -> int:
    if isinstance(v, bool) or v is None:
        raise ValueError(f"expected an integer, found {v!r}")
    if isinstance(v, int):
        return v
    return int(v)


def _as_float(v: Any) -> float | None:
    if v is None:
        return None
    if isinstance(v, bool):
        raise ValueError(f"expected a number, found {v!r}")
    x = float(v)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {v!r}")
    return x
