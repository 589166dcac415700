"""Machine-readable run reports.

Every command run produces a Report: the verdict, the certificate that
backs it (or an explicit note that the budget ran out before one could
be found), and enough bookkeeping to reproduce the run.  Emission is
deterministic: the same inputs give byte-identical output, so reports
can be diffed and checked into test fixtures.

Certificates are plain data.  ``reverify`` re-checks a report against
the objects it talks about without repeating any search: a universality
witness is re-run through the reduction check, a no-go verdict recomputes
the two suprema, a parsimony morphism is rebuilt and revalidated.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .diagonal import Parametrization, witness_ok
from .errors import ValidationError
from .finrel import FinRel, FinSet, UNIT, canonical_text, compose, copy_rel, product
from .order import imitates
from .simcat import SimMorphism
from .simulator import (
    MonotoneFn,
    Reduction,
    Simulator,
    check_reduction,
    nogo_check,
    trivial_simulator,
)
from .tcc import TccInstance

SCHEMA_VERSION = 1


def instance_fingerprint(inst: TccInstance) -> str:
    """A hash of the instance's canonical form, stable across runs."""
    h = hashlib.sha256()
    parts = [
        inst.name,
        inst.targets.id,
        "\x1f".join(inst.targets.elements),
        inst.contexts.id,
        "\x1f".join(inst.contexts.elements),
        inst.behavior.behaviors.id,
        "\x1f".join(inst.behavior.behaviors.elements),
        "brel:"
        + ";".join(
            f"{i}>={j}"
            for i in range(inst.behavior.behaviors.size)
            for j in range(inst.behavior.behaviors.size)
            if inst.behavior.brel.mat[i, j]
        ),
        "eval:" + canonical_text(inst.behavior.eval),
        f"intrinsic:{inst.intrinsic}",
    ]
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


@dataclass
class Report:
    command: str
    arguments: tuple[str, ...]
    verdict: str
    instance: str | None = None
    instance_hash: str | None = None
    certificate: object | None = None
    budget: dict = field(default_factory=dict)
    search_space: str | None = None
    seed: int | None = None
    deviations: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "arguments": list(self.arguments),
            "instance": self.instance,
            "instance_hash": self.instance_hash,
            "verdict": self.verdict,
            "certificate": self.certificate,
            "budget": dict(sorted(self.budget.items())),
            "search_space": self.search_space,
            "seed": self.seed,
            "deviations": list(self.deviations),
        }


def emit(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if fmt == "text":
        lines = []
        for key, value in report.to_dict().items():
            if key == "schema_version":
                continue
            if isinstance(value, (dict, list)):
                value = json.dumps(value, ensure_ascii=False, sort_keys=True)
            lines.append(f"{key}\t{value}")
        return "\n".join(lines) + "\n"
    raise ValidationError(f"unknown report format {fmt!r}")


def load(text: str) -> Report:
    raw = json.loads(text)
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported report version {raw.get('schema_version')!r}"
        )
    return Report(
        command=raw["command"],
        arguments=tuple(raw["arguments"]),
        verdict=raw["verdict"],
        instance=raw.get("instance"),
        instance_hash=raw.get("instance_hash"),
        certificate=raw.get("certificate"),
        budget=raw.get("budget", {}),
        search_space=raw.get("search_space"),
        seed=raw.get("seed"),
        deviations=tuple(raw.get("deviations", ())),
    )


# ---- certificate payloads ----------------------------------------------


def rel_payload(f: FinRel) -> dict:
    return {
        "dom": f.dom.id,
        "cod": f.cod.id,
        "pairs": [[a, b] for a, b in f.pairs()],
    }


def rel_from_payload(dom: FinSet, cod: FinSet, payload: dict) -> FinRel:
    if payload["dom"] != dom.id or payload["cod"] != cod.id:
        raise ValidationError(
            f"certificate endpoints {payload['dom']!r} -> {payload['cod']!r} "
            f"do not match {dom.id!r} -> {cod.id!r}"
        )
    return FinRel.from_pairs(dom, cod, [tuple(p) for p in payload["pairs"]])


def reduction_payload(r: Reduction) -> dict:
    out = rel_payload(r.rel)
    out["flavor"] = r.flavor
    return out


def morphism_payload(m: SimMorphism) -> dict:
    return {
        "r": rel_payload(m.r),
        "qt": rel_payload(m.proc.qt),
        "qc": rel_payload(m.proc.qc),
    }


# ---- search-free re-verification ---------------------------------------


def _need(env: dict, key: str):
    if key not in env:
        raise ValidationError(f"re-verification needs {key!r} in the environment")
    return env[key]


def _reverify_universal(report: Report, env: dict) -> bool:
    sim: Simulator = _need(env, "simulator")
    triv = trivial_simulator(sim.inst)
    if report.verdict == "universal":
        rel = rel_from_payload(triv.programs, sim.programs, report.certificate)
        return check_reduction(Reduction(rel, "lax"), sim, triv)
    # a negative verdict has no witness; it stands on the recorded scan
    return report.certificate is None and bool(report.budget.get("exhausted"))


def _reverify_reduce(report: Report, env: dict) -> bool:
    source: Simulator = _need(env, "source")
    target: Simulator = _need(env, "target")
    found = {k: v for k, v in (report.certificate or {}).items() if v is not None}
    if (report.verdict == "reduces") != bool(found):
        return False
    for flavor, payload in found.items():
        rel = rel_from_payload(target.programs, source.programs, payload)
        if not check_reduction(Reduction(rel, flavor), source, target):
            return False
    return True


def _reverify_nogo(report: Report, env: dict) -> bool:
    sim: Simulator = _need(env, "simulator")
    phi: MonotoneFn = _need(env, "phi")
    verdict = nogo_check(sim, phi, sim.inst)
    cert = report.certificate or {}
    return (
        verdict.verdict == report.verdict
        and str(cert.get("sup_image")) == str(verdict.sup_image)
        and str(cert.get("sup_all")) == str(verdict.sup_all)
        and cert.get("image_size") == verdict.image_size
    )


def _reverify_lawvere(report: Report, env: dict) -> bool:
    par: Parametrization = _need(env, "parametrization")
    g: FinRel = _need(env, "g")
    if report.verdict != "fixed-point" or not report.certificate:
        return False
    cert = report.certificate
    c = par.inst.contexts
    brel = par.inst.behavior.brel
    witness = rel_from_payload(UNIT, c, cert["witness"])
    point = rel_from_payload(UNIT, par.inst.behavior.behaviors, cert["point"])
    diagonal = compose(par.rel, copy_rel(c))
    twisted = compose(g, diagonal)
    if not witness_ok(par, twisted, witness):
        return False
    if compose(diagonal, witness) != point:
        return False
    return imitates(point, compose(g, point), brel)


def _reverify_functor(report: Report, env: dict) -> bool:
    from .tcfunctor import check_tc_functor

    fun = _need(env, "functor")
    ok, _ = check_tc_functor(fun)
    return ok if report.verdict == "valid" else not ok


def _reverify_parsimony(report: Report, env: dict) -> bool:
    from .simcat import make_processing

    source: Simulator = _need(env, "source")
    target: Simulator = _need(env, "target")
    if report.verdict == "morphism-found":
        cert = report.certificate
        inst = source.inst
        rel = rel_from_payload(target.programs, source.programs, cert["r"])
        qt = rel_from_payload(
            product(target.programs, inst.targets), inst.targets, cert["qt"]
        )
        qc = rel_from_payload(
            product(target.programs, inst.targets, inst.contexts),
            inst.contexts,
            cert["qc"],
        )
        proc = make_processing(inst, target.programs, qt, qc)
        SimMorphism(source, target, rel, proc)  # constructor revalidates
        return True
    # negatives either carry a nonexistence argument or a budget note
    if report.verdict == "none-exists":
        return bool(report.certificate)
    return bool(report.budget.get("exhausted") is False or report.deviations)


REVERIFIERS = {
    "universal": _reverify_universal,
    "reduce": _reverify_reduce,
    "nogo": _reverify_nogo,
    "lawvere": _reverify_lawvere,
    "functor-check": _reverify_functor,
    "parsimony": _reverify_parsimony,
}


def reverify(report: Report, env: dict) -> bool:
    """Re-check a report's verdict from its certificate, with no search."""
    handler = REVERIFIERS.get(report.command)
    if handler is None:
        raise ValidationError(f"no re-verifier for command {report.command!r}")
    return handler(report, env)
