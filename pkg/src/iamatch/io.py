"""JSON problem and matching files.

Problem file::

    {"activities": [{"id": "a", "capacity": 2}, ...],
     "individuals": [{"id": "1", "interests": {"a": 0.5, ...},
                      "affinities": {"2": 1.0, ...}}, ...],
     "seed": 7}

Matching file::

    {"assignments": {"1": "a", "2": null, ...}}
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .errors import DomainError, ParseError, StructuralError
from .model import VOID, IAProblem, Matching


def _load(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None


def _expect(cond: bool, message: str, loc: str) -> None:
    if not cond:
        raise ParseError(message, loc)


def _unit(value: Any, loc: str) -> float:
    ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    _expect(ok, "expected a number", loc)
    _expect(math.isfinite(value) and -1.0 <= value <= 1.0, f"{value} not in [-1, 1]", loc)
    return float(value)


def problem_from_dict(doc: Any) -> IAProblem:
    _expect(isinstance(doc, dict), "expected an object", "/")
    unknown = set(doc) - {"activities", "individuals", "seed"}
    _expect(not unknown, f"unknown keys {sorted(unknown)}", "/")
    acts = doc.get("activities")
    inds = doc.get("individuals")
    _expect(isinstance(acts, list), "expected an array", "/activities")
    _expect(isinstance(inds, list), "expected an array", "/individuals")

    act_ids, caps = [], []
    for k, entry in enumerate(acts):
        loc = f"/activities/{k}"
        _expect(isinstance(entry, dict), "expected an object", loc)
        _expect(isinstance(entry.get("id"), str), "missing string id", loc + "/id")
        cap = entry.get("capacity")
        _expect(
            isinstance(cap, int) and not isinstance(cap, bool) and cap >= 1,
            "capacity must be a positive integer",
            loc + "/capacity",
        )
        _expect(entry["id"] not in act_ids, f"duplicate activity {entry['id']!r}", loc)
        act_ids.append(entry["id"])
        caps.append(cap)
    _expect(len(act_ids) >= 1, "at least one activity is required", "/activities")

    ind_ids = []
    for k, entry in enumerate(inds):
        loc = f"/individuals/{k}"
        _expect(isinstance(entry, dict), "expected an object", loc)
        _expect(isinstance(entry.get("id"), str), "missing string id", loc + "/id")
        _expect(entry["id"] not in ind_ids, f"duplicate individual {entry['id']!r}", loc)
        ind_ids.append(entry["id"])
    m, n = len(ind_ids), len(act_ids)
    _expect(m >= 2, f"at least 2 individuals are required, got {m}", "/individuals")

    interest = np.zeros((m, n))
    affinity = np.zeros((m, m))
    for i, entry in enumerate(inds):
        loc = f"/individuals/{i}"
        ints = entry.get("interests")
        affs = entry.get("affinities")
        _expect(isinstance(ints, dict), "expected an object", loc + "/interests")
        _expect(isinstance(affs, dict), "expected an object", loc + "/affinities")
        _expect(set(ints) == set(act_ids), "interests must cover exactly the activities",
                loc + "/interests")
        peers = set(ind_ids) - {ind_ids[i]}
        missing = sorted(peers - set(affs))
        extra = sorted(set(affs) - peers)
        _expect(not missing, f"missing affinities for {missing}", loc + "/affinities")
        _expect(not extra, f"unexpected affinity keys {extra}", loc + "/affinities")
        for a, act in enumerate(act_ids):
            interest[i, a] = _unit(ints[act], f"{loc}/interests/{act}")
        for j, peer in enumerate(ind_ids):
            if j != i:
                affinity[i, j] = _unit(affs[peer], f"{loc}/affinities/{peer}")

    seed = doc.get("seed")
    _expect(seed is None or (isinstance(seed, int) and not isinstance(seed, bool)),
            "seed must be an integer", "/seed")
    try:
        return IAProblem(tuple(act_ids), tuple(caps), tuple(ind_ids), interest, affinity, seed)
    except DomainError as exc:
        raise ParseError(str(exc), "/") from None


def problem_to_dict(problem: IAProblem) -> dict:
    doc: dict[str, Any] = {
        "activities": [
            {"id": a, "capacity": c} for a, c in zip(problem.activity_ids, problem.capacities)
        ],
        "individuals": [],
    }
    for i, ident in enumerate(problem.individual_ids):
        doc["individuals"].append(
            {
                "id": ident,
                "interests": {
                    act: float(problem.interest[i, a])
                    for a, act in enumerate(problem.activity_ids)
                },
                "affinities": {
                    peer: float(problem.affinity[i, j])
                    for j, peer in enumerate(problem.individual_ids)
                    if j != i
                },
            }
        )
    if problem.seed is not None:
        doc["seed"] = problem.seed
    return doc


def parse_problem(text: str) -> IAProblem:
    return problem_from_dict(_load(text))


def serialize_problem(problem: IAProblem) -> str:
    return json.dumps(problem_to_dict(problem), indent=2) + "\n"


def matching_from_dict(doc: Any, problem: IAProblem) -> Matching:
    _expect(isinstance(doc, dict), "expected an object", "/")
    assignments = doc.get("assignments")
    _expect(isinstance(assignments, dict), "expected an object", "/assignments")
    for ident, act in assignments.items():
        _expect(act is None or isinstance(act, str), "expected an activity id or null",
                f"/assignments/{ident}")
    try:
        return problem.matching(assignments)
    except StructuralError:
        raise
    except DomainError as exc:  # pragma: no cover - defensive
        raise ParseError(str(exc), "/assignments") from None


def matching_to_dict(problem: IAProblem, matching: Matching) -> dict:
    return {
        "assignments": {
            ident: (None if a == VOID else problem.activity_ids[a])
            for ident, a in zip(problem.individual_ids, matching.assignment)
        }
    }


def parse_matching(text: str, problem: IAProblem) -> Matching:
    return matching_from_dict(_load(text), problem)


def serialize_matching(problem: IAProblem, matching: Matching) -> str:
    return json.dumps(matching_to_dict(problem, matching), indent=2) + "\n"


def describe_matching(problem: IAProblem, matching: Matching) -> str:
    """Compact human form, e.g. ``a:{1,2} b:{4} void:{3}``."""
    parts = []
    for a, act in enumerate(problem.activity_ids):
        members = ",".join(problem.individual_ids[i] for i in sorted(matching.participants(a)))
        parts.append(f"{act}:{{{members}}}")
    idle = ",".join(problem.individual_ids[i] for i in sorted(matching.participants(VOID)))
    parts.append(f"void:{{{idle}}}")
    return " ".join(parts)


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"
