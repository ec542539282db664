"""JSON documents for TRNs (schema ``schemas/trn_document.v1.json``).

Events are referred to by name; ``null`` bounds stand for +/- infinity.
"""
from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources as importlib_resources

import jsonschema

from trn.atn import ContingentLink, Normal, Pstn, Stnu, UncertainDuration
from trn.resource import ResourceConstraint, Trn
from trn.temporal import INF, Stc, Stn

VERSION = 1


class DocumentError(ValueError):
    pass


@lru_cache(maxsize=None)
def schema() -> dict:
    text = importlib_resources.files("trn").joinpath("schemas/trn_document.v1.json").read_text()
    return json.loads(text)


def validate(doc: dict) -> None:
    try:
        jsonschema.validate(doc, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DocumentError(f"{where}: {exc.message}") from None


def _bound(v, default):
    return default if v is None else float(v)


def _json_bound(v):
    return None if math.isinf(v) else v


def from_document(doc: dict) -> Trn:
    validate(doc)
    names = tuple(doc["events"])
    idx = {n: i for i, n in enumerate(names)}

    def ev(name):
        try:
            return idx[name]
        except KeyError:
            raise DocumentError(f"unknown event {name!r}") from None

    temporal = doc["temporal"]
    try:
        stcs = tuple(Stc(ev(c["from"]), ev(c["to"]), _bound(c["lb"], -INF), _bound(c["ub"], INF))
                     for c in temporal["constraints"])
        base = Stn(names, stcs)
        kind = temporal["type"]
        if kind == "stn":
            atn = base
        elif kind == "stnu":
            atn = Stnu(base, tuple(ContingentLink(ev(c["from"]), ev(c["to"]), float(c["lb"]), float(c["ub"]))
                                   for c in temporal["contingent"]))
        else:
            udns = tuple(UncertainDuration(ev(u["from"]), ev(u["to"]),
                                           Normal(float(u["dist"]["mean"]), float(u["dist"]["std"])))
                         for u in temporal["udns"])
            atn = Pstn(base, udns, float(temporal["probability"]))
        res = tuple(ResourceConstraint(ev(r["start"]), ev(r["end"]), float(r["rate"]))
                    for r in doc["resources"])
        return Trn(atn, res)
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(str(exc)) from None


def to_document(trn: Trn) -> dict:
    atn = trn.atn
    names = list(trn.names)
    base = atn if isinstance(atn, Stn) else atn.base
    temporal = {
        "type": "stn" if isinstance(atn, Stn) else "stnu" if isinstance(atn, Stnu) else "pstn",
        "constraints": [
            {"from": names[c.source], "to": names[c.target],
             "lb": _json_bound(c.lower), "ub": _json_bound(c.upper)}
            for c in base.constraints
        ],
    }
    if isinstance(atn, Stnu):
        temporal["contingent"] = [
            {"from": names[c.source], "to": names[c.target], "lb": c.lower, "ub": c.upper}
            for c in atn.contingent
        ]
    elif isinstance(atn, Pstn):
        temporal["udns"] = [
            {"from": names[u.source], "to": names[u.target],
             "dist": {"type": "normal", "mean": u.dist.mean, "std": u.dist.std}}
            for u in atn.udns
        ]
        temporal["probability"] = atn.probability
    return {
        "version": VERSION,
        "events": names,
        "temporal": temporal,
        "resources": [{"start": names[r.start], "end": names[r.end], "rate": r.rate}
                      for r in trn.resources],
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def load(path) -> Trn:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from None
    return from_document(doc)


def save(trn: Trn, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(to_document(trn)))


def schedule_document(trn: Trn, schedule: dict, ordering=None, **extra) -> dict:
    names = trn.names
    out = {"version": VERSION,
           "schedule": {names[e]: t for e, t in sorted(schedule.items())}}
    if ordering is not None:
        out["ordering"] = [names[e] for e in ordering.sequence]
    out.update(extra)
    return out
