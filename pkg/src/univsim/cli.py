"""The ``univsim`` command line front end.

Commands load an instance environment (a ``.tcc`` file or a named
preset), run one decision procedure, and print a report.  Exit codes:
0 when a verdict was computed, even a negative one; 2 when the search
budget ran out before a verdict; 1 for everything else, including
parse diagnostics.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dsl
from .diagonal import (
    Parametrization,
    cantor_instance,
    cantor_report,
    lawvere_quasi_fixed_point,
    has_unreachability,
)
from .errors import (
    BudgetExceededError,
    TypeMismatchError,
    UnknownElementError,
    UnivsimError,
    ValidationError,
)
from .finrel import FinRel, identity
from .instances.catalog import PRESETS, PresetBundle, load_preset
from .instances.spin import reduced_spectrum_size
from .report import (
    Report,
    emit,
    instance_fingerprint,
    morphism_payload,
    rel_payload,
)
from .search import SearchBudget, iter_all_rels, iter_functional_rels
from .simcat import decide_parsimony
from .simulator import (
    Reduction,
    Simulator,
    check_reduction,
    find_universality_witness,
    nogo_check,
    trivial_simulator,
)
from .tcc import TccInstance, check_instance_axioms
from .tcfunctor import check_tc_functor


class CliError(Exception):
    pass


@dataclass
class Env:
    """Where names in command arguments come from."""

    label: str | None = None
    doc: dsl.SpecDocument | None = None
    bundle: PresetBundle | None = None

    def require(self):
        if self.doc is None and self.bundle is None:
            raise CliError("this command needs --instance FILE or --instance preset:NAME")

    def all_instances(self) -> dict:
        self.require()
        if self.bundle is not None:
            return {self.bundle.inst.name: self.bundle.inst}
        return self.doc.instances

    def default_instance(self) -> TccInstance:
        insts = self.all_instances()
        if len(insts) == 1:
            return next(iter(insts.values()))
        raise CliError(
            "the document defines several instances: " + ", ".join(sorted(insts))
        )

    def simulator(self, name: str) -> Simulator:
        self.require()
        table = self.bundle.simulators if self.bundle else self.doc.simulators
        if name in table:
            return table[name]
        if name == "trivial":
            return trivial_simulator(self.default_instance())
        if name.startswith("trivial:"):
            inst = self.all_instances().get(name.split(":", 1)[1])
            if inst is not None:
                return trivial_simulator(inst)
        raise CliError(f"unknown simulator {name!r}; have {', '.join(sorted(table))}")

    def phi(self, name: str, sim: Simulator):
        if self.bundle and name in self.bundle.phis:
            return self.bundle.phis[name]
        if self.doc is not None:
            st = self.doc.spin_backing.get(sim.inst.name)
            if st is not None and name == "spectrum-size":
                return reduced_spectrum_size(st)
        have = sorted(self.bundle.phis) if self.bundle else ["spectrum-size"]
        raise CliError(f"unknown grading {name!r}; have {', '.join(have)}")

    def behavior_endo(self, name: str, inst: TccInstance) -> FinRel:
        if self.doc is not None and name in self.doc.rels:
            return self.doc.rels[name]
        b = inst.behavior.behaviors
        if name == "identity":
            return identity(b)
        if name == "cycle":
            pairs = [
                (b.elements[i], b.elements[(i + 1) % b.size]) for i in range(b.size)
            ]
            return FinRel.from_pairs(b, b, pairs)
        if name.startswith("constant:"):
            label = name.split(":", 1)[1]
            if label not in b.elements:
                raise CliError(f"{label!r} is not a behavior of {inst.name}")
            return FinRel.from_pairs(b, b, [(e, label) for e in b.elements])
        raise CliError(
            f"unknown behavior map {name!r}; use a rel name, identity, cycle,"
            " or constant:<behavior>"
        )

    def parametrization(self, inst: TccInstance, par_name: str | None):
        if par_name is not None:
            if self.doc is None or par_name not in self.doc.rels:
                raise CliError(f"unknown rel {par_name!r} for the parametrization")
            rel = self.doc.rels[par_name]
            return Parametrization(inst, inst.contexts, rel)
        if self.bundle is not None and self.bundle.parametrization is not None:
            return self.bundle.parametrization
        if inst.targets == inst.contexts:
            return Parametrization(inst, inst.contexts, inst.eval)
        raise CliError(
            "no parametrization available: name a rel over contexts x contexts"
        )

    def functor(self, name: str):
        self.require()
        if self.doc is not None and name in self.doc.functors:
            return self.doc.functors[name]
        have = sorted(self.doc.functors) if self.doc else []
        raise CliError(f"unknown functor {name!r}; have {', '.join(have)}")


def load_env(spec: str | None) -> Env:
    if spec is None:
        return Env()
    if spec.startswith("preset:"):
        return Env(spec, bundle=load_preset(spec.split(":", 1)[1]))
    path = Path(spec)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {spec}: {e.strerror or e}") from None
    doc = dsl.parse(text)
    if not doc.ok:
        for d in doc.diagnostics:
            print(f"{spec}:{d}", file=sys.stderr)
        raise CliError(f"{len(doc.diagnostics)} diagnostic(s) in {spec}")
    return Env(spec, doc=doc)


def _jsonify(value):
    """Certificate values down to plain JSON data."""
    if isinstance(value, FinRel):
        return rel_payload(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, (np.bool_, np.integer)):
        return value.item()
    return value


def _stamp(report: Report, inst: TccInstance | None, budget: SearchBudget, args):
    if inst is not None:
        report.instance = inst.name
        report.instance_hash = instance_fingerprint(inst)
    report.budget.setdefault("max_candidates", budget.max_candidates)
    report.search_space = getattr(args, "search", None)
    report.seed = getattr(args, "seed", None)
    return report


# ---- command handlers --------------------------------------------------


def cmd_laws(env: Env, args, budget, rng):
    insts = env.all_instances()
    failures = {}
    for name in sorted(insts):
        notes = check_instance_axioms(insts[name], rng, samples=30)
        if notes:
            failures[name] = notes
    verdict = "pass" if not failures else "fail"
    report = Report("laws", tuple(sorted(insts)), verdict, certificate=failures or None)
    sole = next(iter(insts.values())) if len(insts) == 1 else None
    mats = [
        (f"eval {name}", insts[name].eval.mat, None, None)
        for name in sorted(insts)[:3]
    ]
    return _stamp(report, sole, budget, args), {"matrices": mats}


def cmd_universal(env: Env, args, budget, rng):
    sim = env.simulator(args.simulator)
    witness = find_universality_witness(sim, budget)
    if witness is None:
        report = Report(
            "universal",
            (args.simulator,),
            "not-universal",
            budget={"exhausted": True},
        )
        artifacts = {"matrices": [("body", sim.s.mat, None, None)]}
    else:
        rel = witness.rel
        report = Report(
            "universal",
            (args.simulator,),
            "universal",
            certificate=rel_payload(rel),
            budget={"exhausted": False},
        )
        artifacts = {
            "matrices": [
                ("witness", rel.mat, rel.dom.elements, rel.cod.elements),
                ("compiler", sim.compiler.mat, None, None),
            ]
        }
    return _stamp(report, sim.inst, budget, args), artifacts


def cmd_reduce(env: Env, args, budget, rng):
    source = env.simulator(args.source)
    target = env.simulator(args.target)
    if source.inst != target.inst:
        raise CliError("reductions compare simulators on one instance")
    dom, cod = target.programs, source.programs
    if args.search == "functional":
        count = (cod.size + 1) ** dom.size
        candidates = iter_functional_rels(dom, cod)
    else:
        count = 2 ** (dom.size * cod.size)
        candidates = iter_all_rels(dom, cod)
    budget.charge(count, f"reduction search {dom.id} -> {cod.id}")
    found: dict = {"strict": None, "lax": None, "oplax": None}
    for rel in candidates:
        for flavor in found:
            if found[flavor] is None and check_reduction(
                Reduction(rel, flavor), source, target
            ):
                found[flavor] = rel
        if all(v is not None for v in found.values()):
            break
    verdict = "reduces" if any(v is not None for v in found.values()) else "no-reduction"
    cert = {k: (rel_payload(v) if v is not None else None) for k, v in found.items()}
    report = Report(
        "reduce",
        (args.source, args.target),
        verdict,
        certificate=cert,
        budget={"exhausted": verdict == "no-reduction"},
    )
    mats = [
        (flavor, rel.mat, rel.dom.elements, rel.cod.elements)
        for flavor, rel in found.items()
        if rel is not None
    ]
    return _stamp(report, source.inst, budget, args), {"matrices": mats}


def cmd_nogo(env: Env, args, budget, rng):
    sim = env.simulator(args.simulator)
    phi = env.phi(args.phi, sim)
    verdict = nogo_check(sim, phi, sim.inst)
    cert = {
        "phi": phi.name,
        "sup_image": str(verdict.sup_image),
        "sup_all": str(verdict.sup_all),
        "image_size": verdict.image_size,
    }
    report = Report(
        "nogo", (args.simulator, args.phi), verdict.verdict, certificate=cert
    )
    series = {
        label: float(phi.values[label])
        for label in sim.inst.targets.elements
        if label in phi.values
    }
    artifacts = {"series": [(phi.name, series)]}
    return _stamp(report, sim.inst, budget, args), artifacts


def cmd_parsimony(env: Env, args, budget, rng):
    a = env.simulator(args.a)
    b = env.simulator(args.b)
    res = decide_parsimony(a, b, budget)
    cert: dict = {"method": res.method}
    artifacts: dict = {}
    if res.morphism is not None:
        cert.update(morphism_payload(res.morphism))
        artifacts["matrices"] = [
            (
                "r",
                res.morphism.r.mat,
                res.morphism.r.dom.elements,
                res.morphism.r.cod.elements,
            )
        ]
    elif res.certificate is not None:
        cert.update(_jsonify(res.certificate))
    report = Report("parsimony", (args.a, args.b), res.status, certificate=cert)
    return _stamp(report, a.inst, budget, args), artifacts


def cmd_lawvere(env: Env, args, budget, rng):
    inst = env.default_instance()
    par = env.parametrization(inst, args.parametrization)
    g = env.behavior_endo(args.g, inst)
    try:
        res = lawvere_quasi_fixed_point(par, g, budget)
    except ValidationError as e:
        report = Report(
            "lawvere", (args.g,), "no-witness", deviations=(str(e),)
        )
        return _stamp(report, inst, budget, args), {}
    cert = {"point": rel_payload(res.point), "witness": rel_payload(res.witness)}
    report = Report("lawvere", (args.g,), "fixed-point", certificate=cert)
    artifacts = {
        "matrices": [
            ("twisted diagonal", res.twisted.mat, None, res.twisted.cod.elements),
            ("point", res.point.mat, None, res.point.cod.elements),
        ]
    }
    return _stamp(report, inst, budget, args), artifacts


def cmd_unreachability(env: Env, args, budget, rng):
    sim = env.simulator(args.simulator)
    res = has_unreachability(sim, args.search, budget)
    verdict = "unreachable" if res.unreachable else "all-reachable"
    cert = None
    artifacts: dict = {}
    if res.counterexample is not None:
        cert = rel_payload(res.counterexample)
        artifacts["matrices"] = [
            (
                "missing map",
                res.counterexample.mat,
                None,
                res.counterexample.cod.elements,
            )
        ]
    report = Report(
        "unreachability",
        (args.simulator,),
        verdict,
        certificate=cert,
        budget={"charged": res.checked},
    )
    return _stamp(report, sim.inst, budget, args), artifacts


def cmd_cantor(env: Env, args, budget, rng):
    rep = cantor_report(args.n, budget)
    verdict = "equivalence-holds" if rep.equivalence_holds else "equivalence-fails"
    deviations = []
    if rep.universal_exists_any_context_reduction is None:
        deviations.append("widened context-reduction scan skipped: over budget")
    cert = {
        "n": rep.n,
        "subsets": rep.subsets,
        "compilers_checked": rep.compilers_checked,
        "simulators_checked": rep.simulators_checked,
        "universal_exists": rep.universal_exists,
        "surjection_exists": rep.surjection_exists,
        "universal_exists_any_context_reduction": rep.universal_exists_any_context_reduction,
        "negation_point": (
            rel_payload(rep.negation_point) if rep.negation_point is not None else None
        ),
        "completeness_mode": rep.completeness_mode,
        "complete_over_contexts": rep.complete_over_contexts,
    }
    report = Report(
        "cantor",
        (str(args.n),),
        verdict,
        certificate=cert,
        deviations=tuple(deviations),
    )
    flags = {
        "universal": rep.universal_exists,
        "surjection": rep.surjection_exists,
        "equivalence": rep.equivalence_holds,
        "complete": rep.complete_over_contexts,
    }
    artifacts = {"series": [("cantor flags", {k: float(v) for k, v in flags.items()})]}
    return _stamp(report, cantor_instance(args.n), budget, args), artifacts


def cmd_functor_check(env: Env, args, budget, rng):
    fun = env.functor(args.functor)
    ok, violations = check_tc_functor(fun, rng=rng)
    report = Report(
        "functor-check",
        (args.functor,),
        "valid" if ok else "invalid",
        certificate=None if ok else list(violations),
    )
    mats = [
        (
            f"{asgn.src.id} -> {asgn.dst.id}",
            asgn.rel().mat,
            asgn.src.elements,
            asgn.dst.elements,
        )
        for asgn in fun.assignments
    ]
    return _stamp(report, fun.source, budget, args), {"matrices": mats}


def _export_block(block: dsl.Block) -> dict:
    v = block.value
    out: dict = {"kind": block.kind, "name": block.name}
    if block.kind == "set":
        out["elements"] = list(v.elements)
    elif block.kind == "rel":
        out["dom"] = block.refs["dom"]
        out["cod"] = block.refs["cod"]
        out["pairs"] = [[a, b] for a, b in v.pairs()]
    elif block.kind == "preorder":
        carrier = v.carrier
        out["carrier"] = block.refs["carrier"]
        out["edges"] = [
            [carrier.elements[i], carrier.elements[j]]
            for i in range(carrier.size)
            for j in range(carrier.size)
            if i != j and v.mat[i, j]
        ]
    elif block.kind == "tcc":
        out.update(block.refs)
        out["intrinsic"] = bool(v.intrinsic)
    elif block.kind in ("simulator", "processing"):
        out.update(block.refs)
    elif block.kind == "functor":
        out["source"] = block.refs["source"]
        out["target"] = block.refs["target"]
        out["objects"] = [
            {
                "src": a_name,
                "dst": b_name,
                "images": {e: img for e, img in zip(asgn.src.elements, asgn.relabel)},
            }
            for (a_name, b_name), asgn in zip(block.refs["objects"], v.assignments)
        ]
    elif block.kind == "spin":
        out["complex"] = v.complex.name
        out["q"] = v.q
        out["vertices"] = list(v.complex.vertices)
        out["terms"] = [
            {
                "facet": list(facet),
                "table": [
                    [list(values), str(energy)]
                    for values, energy in sorted(v.terms[facet].items())
                ],
            }
            for facet in v.complex.facets
        ]
        out["delta"] = str(v.delta)
    elif block.kind == "check":
        out["run"] = list(v.command)
        if v.expect is not None:
            out["expect"] = v.expect
    return out


def cmd_export(env: Env, args, budget, rng):
    if env.doc is None:
        raise CliError("export needs --instance FILE")
    payload = {
        "format": "univsim-document",
        "version": 1,
        "blocks": [_export_block(b) for b in env.doc.blocks],
    }
    report = Report("export", (), "exported", certificate=payload)
    report.budget["max_candidates"] = budget.max_candidates
    report.seed = getattr(args, "seed", None)
    report.search_space = getattr(args, "search", None)
    return report, {}


def cmd_checks(env: Env, args, budget, rng):
    if env.doc is None:
        raise CliError("checks needs --instance FILE")
    results = []
    all_ok = True
    for block in env.doc.blocks:
        if block.kind != "check":
            continue
        spec = block.value
        sub = _parse_tokens(spec.command)
        handler = HANDLERS[sub.command]
        try:
            rep, _ = handler(env, sub, budget, rng)
            got = rep.verdict
        except BudgetExceededError:
            got = "budget-exceeded"
        ok = spec.expect is None or got == spec.expect
        all_ok = all_ok and ok
        results.append(
            {
                "name": block.name,
                "run": list(spec.command),
                "verdict": got,
                "expect": spec.expect,
                "ok": ok,
            }
        )
    verdict = "all-passed" if all_ok else "failed"
    report = Report("checks", (), verdict, certificate=results)
    report.budget["max_candidates"] = budget.max_candidates
    series = {r["name"]: float(r["ok"]) for r in results}
    artifacts = {"series": [("checks", series)]} if series else {}
    return report, artifacts


HANDLERS = {
    "laws": cmd_laws,
    "universal": cmd_universal,
    "reduce": cmd_reduce,
    "nogo": cmd_nogo,
    "parsimony": cmd_parsimony,
    "lawvere": cmd_lawvere,
    "unreachability": cmd_unreachability,
    "cantor": cmd_cantor,
    "functor-check": cmd_functor_check,
    "export": cmd_export,
    "checks": cmd_checks,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--instance",
        metavar="FILE|preset:NAME",
        help="a .tcc document or one of: " + ", ".join(sorted(PRESETS)),
    )
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--figures", metavar="DIR", help="also render figures here")
    common.add_argument("--max-candidates", type=int, default=None)
    common.add_argument("--search", choices=("functional", "all"), default="functional")
    common.add_argument("--seed", type=int, default=None)

    parser = argparse.ArgumentParser(
        prog="univsim",
        description="decision procedures for finite simulation instances",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("laws", parents=[common], help="instance axiom checks")
    p = sub.add_parser("universal", parents=[common], help="search a universality witness")
    p.add_argument("simulator")
    p = sub.add_parser("reduce", parents=[common], help="find reductions between two simulators")
    p.add_argument("source")
    p.add_argument("target")
    p = sub.add_parser("nogo", parents=[common], help="grading obstruction to universality")
    p.add_argument("simulator")
    p.add_argument("phi")
    p = sub.add_parser("parsimony", parents=[common], help="decide simulator morphism existence")
    p.add_argument("a")
    p.add_argument("b")
    p = sub.add_parser("lawvere", parents=[common], help="diagonal quasi-fixed point")
    p.add_argument("g")
    p.add_argument("parametrization", nargs="?", default=None)
    p = sub.add_parser("unreachability", parents=[common], help="find an unrealized context map")
    p.add_argument("simulator")
    p = sub.add_parser("cantor", parents=[common], help="subset instance scan")
    p.add_argument("n", type=int, nargs="?", default=1)
    p = sub.add_parser("functor-check", parents=[common], help="validate an instance functor")
    p.add_argument("functor")
    sub.add_parser("checks", parents=[common], help="run the document's check blocks")
    sub.add_parser("export", parents=[common], help="canonical JSON form of the document")
    return parser


def _parse_tokens(tokens: tuple[str, ...]) -> argparse.Namespace:
    try:
        return build_parser().parse_args(list(tokens))
    except SystemExit:
        raise CliError(f"bad check command: {' '.join(tokens)}") from None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        env = load_env(args.instance)
        if args.max_candidates is not None:
            budget = SearchBudget(max_candidates=args.max_candidates)
        else:
            budget = SearchBudget.from_env()
        rng = random.Random(0 if args.seed is None else args.seed)
        handler = HANDLERS[args.command]
        try:
            report, artifacts = handler(env, args, budget, rng)
        except BudgetExceededError as e:
            report = Report(
                args.command,
                (),
                "budget-exceeded",
                budget={"max_candidates": budget.max_candidates, "exhausted": False},
                deviations=(str(e),),
            )
            sys.stdout.write(emit(report, args.format))
            return 2
        sys.stdout.write(emit(report, args.format))
        if args.figures:
            from . import plots

            plots.render(report, artifacts, args.figures)
        if args.command == "checks" and report.verdict != "all-passed":
            return 1
        return 0
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (
        ValidationError,
        TypeMismatchError,
        UnknownElementError,
        UnivsimError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
