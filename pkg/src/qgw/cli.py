"""Command-line front end.

Generates fixture bundles and runs the certification commands on them.  A
bundle is one JSON document whose sections reference each other by name;
check commands read the sections they need and print a check table.  Exit
codes: 0 when every check passes, 1 when one fails, 2 on malformed input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import serialize
from .cbase import base_equivalence, cbase_from_state, \
    modular_conjugation_of_base
from .errors import FormatError, PreconditionError, QgwError
from .fiber import fiber_classical, fiber_spatial, is_morphism, \
    transported_match
from .fixtures import FiniteGroupoid, linked_bundle
from .gns import gns
from .hopf import groupoid_hopf, hopf_equivalence, perturbed_hopf
from .linalg import Tolerance, dagger, mat_norm
from .pmu import PmuCandidate, groupoid_pmu, phase_perturbed_candidate, \
    pmu_equivalence, swapped_candidate
from .report import Check, Report, checks_from_residuals
from .rtensor import ket_factorization, phi_unitary, rtp_cstar, rtp_state
from .staralg import algebra_from_generators


def resolve_tolerance(value: float | None) -> Tolerance:
    if value is None:
        env = os.environ.get("QGW_TOLERANCE")
        value = float(env) if env else 1e-9
    if value <= 0:
        raise FormatError("tolerance must be positive")
    return Tolerance(eps=value)


def load_bundle(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"{path}: malformed JSON at line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}"
        ) from None
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from None
    return serialize.check_bundle(doc, path)


def section(container: dict, name: str, where: str = "bundle"):
    if not isinstance(container, dict) or name not in container:
        raise FormatError(f"{where} lacks section '{name}'")
    return container[name]


# bundle assembly


def groupoid_bundle_json(gpd: FiniteGroupoid, source: dict, variant: str,
                         angle: float, hopf_perturb: int | None,
                         tol: Tolerance) -> dict:
    hopf_data = groupoid_hopf(gpd, tol=tol)
    if hopf_perturb is not None:
        hopf_data = perturbed_hopf(hopf_data, seed=hopf_perturb)
    pmu_data = groupoid_pmu(gpd, tol=tol)
    cand = pmu_data["candidate"]
    if variant == "swap":
        cand = swapped_candidate(pmu_data)
    elif variant == "phase":
        cand = phase_perturbed_candidate(pmu_data, angle)
    triple = hopf_data["triple"]
    arrow_alg = hopf_data["algebra"]
    out = serialize.bundle_skeleton("groupoid", source, tol)
    out["state"] = serialize.encode_state(triple.state)
    out["arrow_algebra"] = serialize.encode_algebra(arrow_alg)
    out["reps"] = {
        "rho": serialize.encode_stack(hopf_data["rho"]),
        "sigma": serialize.encode_stack(hopf_data["sigma"]),
        "sigma_hat": serialize.encode_stack(hopf_data["source_stack"]),
    }
    out["factorizations"] = {
        "alpha": serialize.encode_factorization(hopf_data["alpha"], "state"),
        "beta": serialize.encode_factorization(hopf_data["beta"], "state"),
        "beta_hat": serialize.encode_factorization(
            pmu_data["beta_hat"], "state"
        ),
        "alpha_flipped": serialize.encode_factorization(
            pmu_data["alpha_flipped"], "state"
        ),
    }
    basis = arrow_alg.basis()
    images_state = [hopf_data["delta_state"](b) for b in basis]
    images_cstar = [hopf_data["delta_cstar"](b) for b in basis]
    out["hopf"] = {
        "state": {
            "side": "state",
            "A": "arrow_algebra",
            "Delta": serialize.encode_morphism(
                images_state, "arrow_algebra", "fiber-state"
            ),
            "legs": {"rho": "reps.rho", "sigma": "reps.sigma"},
        },
        "operator": {
            "side": "operator",
            "A": "arrow_algebra",
            "Delta": serialize.encode_morphism(
                images_cstar, "arrow_algebra", "fiber-operator"
            ),
            "legs": {
                "alpha": "factorizations.alpha",
                "beta": "factorizations.beta",
            },
        },
    }
    out["pmu"] = {
        "base": "state",
        "reps": {
            "rho": "reps.rho",
            "sigma": "reps.sigma",
            "sigma_hat": "reps.sigma_hat",
        },
        "V": serialize.encode_matrix(cand.v_matrix),
        "coordinate_maps": {
            "source_classes": serialize.encode_matrix(
                cand.source_space.class_map
            ),
            "target_sections": serialize.encode_matrix(
                cand.target_space.section
            ),
        },
    }
    return out


def linked_bundle_json(blocks, mult_left: int, mult_right: int, seed: int,
                       source: dict, tol: Tolerance) -> dict:
    data = linked_bundle(blocks, mult_left, mult_right, seed, tol)
    triple = data["triple"]
    out = serialize.bundle_skeleton("linked", source, tol)
    out["state"] = serialize.encode_state(triple.state)
    out["base"] = serialize.encode_base(data["base"])
    out["reps"] = {
        "rho": serialize.encode_stack(data["rho"]),
        "sigma": serialize.encode_stack(data["sigma"]),
    }
    out["factorizations"] = {
        "alpha": serialize.encode_factorization(data["alpha"], "state"),
        "beta": serialize.encode_factorization(data["beta"], "state"),
    }
    return out


# shared decoding


def load_triple(bundle: dict, tol: Tolerance):
    state = serialize.decode_state(section(bundle, "state"), "state", tol)
    return state, gns(state.algebra, state, tol)


def load_reps(bundle: dict, tol: Tolerance, names=("rho", "sigma")) -> dict:
    reps = section(bundle, "reps")
    out = {}
    for name in names:
        if name not in reps:
            raise FormatError(f"reps section lacks '{name}'")
        out[name] = serialize.decode_stack(reps[name], f"reps.{name}")
    return out


def load_factorizations(bundle: dict, base, tol: Tolerance, names) -> dict:
    facts = section(bundle, "factorizations")
    out = {}
    for name in names:
        if name not in facts:
            raise FormatError(f"factorizations section lacks '{name}'")
        out[name] = serialize.decode_factorization(
            facts[name], base, f"factorizations.{name}", tol
        )
    return out


def load_squares(bundle: dict, tol: Tolerance):
    """Both flavors of the relative square described by a bundle."""
    _, triple = load_triple(bundle, tol)
    reps = load_reps(bundle, tol)
    vn = rtp_state(triple, reps["rho"], reps["sigma"], tol=tol)
    base = cbase_from_state(triple)
    facts = load_factorizations(bundle, base, tol, ("alpha", "beta"))
    cs = rtp_cstar(facts["alpha"], facts["beta"], tol=tol)
    return triple, reps, base, facts, vn, cs


# command handlers; each returns (Report, payload) where payload is a
# document destined for --out instead of the report


def cmd_gen_group(args, tol):
    gpd = FiniteGroupoid.cyclic(args.order)
    source = {
        "family": "cyclic", "n": args.order, "variant": args.variant,
        "angle": args.angle, "hopf_perturb": args.hopf_perturb,
    }
    doc = groupoid_bundle_json(
        gpd, source, args.variant, args.angle, args.hopf_perturb, tol
    )
    report = Report("gen-group", [Check("bundle_complete", 0.0, 1.0)], tol.eps)
    return report, serialize.canonical_dumps(doc)


def cmd_gen_groupoid(args, tol):
    gpd = FiniteGroupoid.pair(args.pair)
    source = {
        "family": "pair", "n": args.pair, "variant": args.variant,
        "angle": args.angle, "hopf_perturb": args.hopf_perturb,
    }
    doc = groupoid_bundle_json(
        gpd, source, args.variant, args.angle, args.hopf_perturb, tol
    )
    report = Report(
        "gen-groupoid", [Check("bundle_complete", 0.0, 1.0)], tol.eps
    )
    return report, serialize.canonical_dumps(doc)


def cmd_gen_random_base(args, tol):
    try:
        blocks = [int(b) for b in args.blocks.split(",") if b.strip()]
    except ValueError:
        raise FormatError(f"--blocks must be integers, got {args.blocks!r}")
    if not blocks or any(b <= 0 for b in blocks):
        raise FormatError("--blocks needs positive sizes like 2,1")
    source = {
        "family": "random", "blocks": blocks, "seed": args.seed,
        "mult_left": args.mult_left, "mult_right": args.mult_right,
    }
    doc = linked_bundle_json(
        blocks, args.mult_left, args.mult_right, args.seed, source, tol
    )
    report = Report(
        "gen-random-base", [Check("bundle_complete", 0.0, 1.0)], tol.eps
    )
    return report, serialize.canonical_dumps(doc)


def cmd_gns(args, tol):
    bundle = load_bundle(args.infile)
    _, triple = load_triple(bundle, tol)
    checks = checks_from_residuals(triple.certificates(), tol.check)
    return Report("gns", checks, tol.eps), None


def cmd_base_check(args, tol):
    bundle = load_bundle(args.infile)
    if "base" in bundle:
        base = serialize.decode_base(bundle["base"], "base", tol)
    else:
        _, triple = load_triple(bundle, tol)
        base = cbase_from_state(triple)
    residuals = dict(base.standard_report())
    if base.cyclic_vector is not None:
        conj = modular_conjugation_of_base(base)
        residuals.update(
            {"conjugation_" + k: v for k, v in conj.residuals.items()}
        )
        equiv = base_equivalence(base)
        residuals.update(
            {"rebuild_" + k: v for k, v in equiv.residuals.items()}
        )
    checks = checks_from_residuals(residuals, tol.check)
    return Report("base-check", checks, tol.eps), None


def cmd_factorize(args, tol):
    bundle = load_bundle(args.infile)
    if "base" in bundle:
        base = serialize.decode_base(bundle["base"], "base", tol)
    else:
        _, triple = load_triple(bundle, tol)
        base = cbase_from_state(triple)
    facts = section(bundle, "factorizations")
    checks = []
    for name in sorted(facts):
        fact = serialize.decode_factorization(
            facts[name], base, f"factorizations.{name}", tol, certify=False
        )
        residuals = dict(fact.axiom_report())
        residuals.update(
            {"action_" + k: v for k, v in fact.rho_report().items()}
        )
        checks.extend(
            checks_from_residuals(residuals, tol.check, prefix=name + "_")
        )
    return Report("factorize", checks, tol.eps), None


def cmd_rtp(args, tol):
    bundle = load_bundle(args.infile)
    _, _, _, _, vn, cs = load_squares(bundle, tol)
    residuals = {
        "dimension_defect": float(abs(vn.dim - cs.dim)),
        "state_gram_hermitian": mat_norm(vn.gram - dagger(vn.gram)),
        "operator_gram_hermitian": mat_norm(cs.gram - dagger(cs.gram)),
        "state_gram_psd": _psd_defect(vn.gram),
        "operator_gram_psd": _psd_defect(cs.gram),
    }
    checks = checks_from_residuals(residuals, tol.check)
    return Report("rtp", checks, tol.eps), None


def _psd_defect(gram: np.ndarray) -> float:
    evs = np.linalg.eigvalsh(0.5 * (gram + dagger(gram)))
    if evs.size == 0:
        return 0.0
    scale = max(1.0, float(evs[-1]))
    return max(0.0, -float(evs[0])) / scale


def cmd_phi(args, tol):
    bundle = load_bundle(args.infile)
    _, _, _, _, vn, cs = load_squares(bundle, tol)
    phi = phi_unitary(vn, cs)
    checks = checks_from_residuals(phi.residuals, tol.check)
    return Report("phi", checks, tol.eps), None


def cmd_fiber(args, tol):
    bundle = load_bundle(args.infile)
    _, reps, _, _, vn, cs = load_squares(bundle, tol)
    nh = reps["rho"].shape[1]
    nk = reps["sigma"].shape[1]
    a = algebra_from_generators(nh, reps["rho"], tol)
    b = algebra_from_generators(nk, reps["sigma"], tol)
    classical = fiber_classical(vn, a, b)
    spatial = fiber_spatial(cs, a, b)
    phi = phi_unitary(vn, cs)
    _, transport = transported_match(
        phi.matrix, classical, spatial, tol.check
    )
    checks = checks_from_residuals(
        {
            "dimension_defect": float(
                abs(classical.algebra.dim - spatial.algebra.dim)
            ),
            "transport": transport,
        },
        tol.check,
    )
    checks += checks_from_residuals(
        classical.residuals, tol.check, prefix="classical_"
    )
    checks += checks_from_residuals(
        spatial.residuals, tol.check, prefix="spatial_"
    )
    return Report("fiber", checks, tol.eps), None


def _hopf_context(bundle: dict, tol: Tolerance):
    triple, reps_vnonly, base, facts, vn, cs = load_squares(bundle, tol)
    arrow = serialize.decode_algebra(
        section(bundle, "arrow_algebra"), "arrow_algebra", tol
    )
    hopf_sec = section(bundle, "hopf")
    gens = np.stack(arrow.basis())
    delta_state = serialize.decode_morphism(
        section(section(hopf_sec, "state", "hopf"), "Delta", "hopf.state"),
        gens, "hopf.state.Delta",
    )
    delta_cstar = serialize.decode_morphism(
        section(section(hopf_sec, "operator", "hopf"), "Delta",
                "hopf.operator"),
        gens, "hopf.operator.Delta",
    )
    return arrow, vn, cs, delta_state, delta_cstar, facts


def cmd_hopf_check(args, tol):
    bundle = load_bundle(args.infile)
    arrow, vn, cs, delta_state, delta_cstar, _ = _hopf_context(bundle, tol)
    eq = hopf_equivalence(vn, cs, arrow, delta_state, delta_cstar)
    checks = checks_from_residuals(
        {
            "verdicts_agree": 0.0 if eq.verdicts_agree else 1.0,
            "transport": eq.transport_residual,
        },
        tol.check,
    )
    checks += checks_from_residuals(
        eq.state_report.residuals, tol.check, prefix="state_"
    )
    checks += checks_from_residuals(
        eq.cstar_report.residuals, tol.check, prefix="operator_"
    )
    return Report("hopf-check", checks, tol.eps), None


def cmd_morphism_check(args, tol):
    bundle = load_bundle(args.infile)
    arrow, vn, cs, _, delta_cstar, facts = _hopf_context(bundle, tol)
    fp = fiber_spatial(cs, arrow, arrow)
    alpha = facts["alpha"]
    alpha2 = ket_factorization(cs, alpha, alpha, leg=0, flipped=False)
    residuals = {}
    try:
        verdict = is_morphism(
            delta_cstar, arrow, alpha, fp.algebra, alpha2,
            threshold=tol.check,
        )
        residuals.update(verdict.residuals)
        residuals["is_morphism"] = 0.0 if verdict.is_morphism else 1.0
    except PreconditionError:
        residuals["preconditions"] = 1.0
        residuals["is_morphism"] = 1.0
    checks = checks_from_residuals(residuals, tol.check)
    return Report("morphism-check", checks, tol.eps), None


def _pmu_candidate(bundle: dict, tol: Tolerance):
    _, triple = load_triple(bundle, tol)
    reps = load_reps(bundle, tol, ("rho", "sigma", "sigma_hat"))
    pmu_sec = section(bundle, "pmu")
    v_hat = serialize.decode_matrix(section(pmu_sec, "V", "pmu"), "pmu.V")
    maps = section(pmu_sec, "coordinate_maps", "pmu")
    src_classes = serialize.decode_matrix(
        section(maps, "source_classes", "pmu.coordinate_maps"),
        "pmu.coordinate_maps.source_classes",
    )
    tgt_sections = serialize.decode_matrix(
        section(maps, "target_sections", "pmu.coordinate_maps"),
        "pmu.coordinate_maps.target_sections",
    )
    if v_hat.shape != (tgt_sections.shape[1], src_classes.shape[0]):
        raise FormatError(
            "pmu.V does not connect the stored coordinate maps"
        )
    v_plain = tgt_sections @ v_hat @ src_classes
    return PmuCandidate(
        triple, reps["sigma_hat"], reps["rho"], reps["sigma"], v_plain, tol
    )


def cmd_pmu_check(args, tol):
    bundle = load_bundle(args.infile)
    cand = _pmu_candidate(bundle, tol)
    base = cbase_from_state(cand.triple)
    facts = load_factorizations(
        bundle, base, tol, ("beta_hat", "alpha_flipped", "alpha", "beta")
    )
    eq = pmu_equivalence(
        cand, facts["beta_hat"], facts["alpha_flipped"],
        facts["alpha"], facts["beta"],
    )
    slack = {"pentagon": tol.pentagon}
    checks = checks_from_residuals(
        {"verdicts_agree": 0.0 if eq.verdicts_agree else 1.0}, tol.check
    )
    checks += checks_from_residuals(
        eq.state_report.residuals, tol.check, overrides=slack, prefix="state_"
    )
    checks += checks_from_residuals(
        eq.cstar_report.residuals, tol.check, overrides=slack,
        prefix="operator_",
    )
    return Report("pmu-check", checks, tol.eps), None


def cmd_equiv_check(args, tol):
    bundle = load_bundle(args.infile)
    _, reps, _, facts, vn, cs = load_squares(bundle, tol)
    phi = phi_unitary(vn, cs)
    checks = checks_from_residuals(phi.residuals, tol.check, prefix="phi_")
    residuals = {}
    nh = reps["rho"].shape[1]
    nk = reps["sigma"].shape[1]
    a = algebra_from_generators(nh, reps["rho"], tol)
    b = algebra_from_generators(nk, reps["sigma"], tol)
    classical = fiber_classical(vn, a, b)
    spatial = fiber_spatial(cs, a, b)
    _, transport = transported_match(
        phi.matrix, classical, spatial, tol.check
    )
    residuals["fiber_transport"] = transport
    if "hopf" in bundle:
        arrow, vn2, cs2, d_state, d_cstar, _ = _hopf_context(bundle, tol)
        heq = hopf_equivalence(vn2, cs2, arrow, d_state, d_cstar)
        residuals["hopf_verdicts_agree"] = 0.0 if heq.verdicts_agree else 1.0
        residuals["hopf_transport"] = heq.transport_residual
    if "pmu" in bundle:
        cand = _pmu_candidate(bundle, tol)
        base = cbase_from_state(cand.triple)
        pfacts = load_factorizations(
            bundle, base, tol, ("beta_hat", "alpha_flipped", "alpha", "beta")
        )
        peq = pmu_equivalence(
            cand, pfacts["beta_hat"], pfacts["alpha_flipped"],
            pfacts["alpha"], pfacts["beta"],
        )
        residuals["pmu_verdicts_agree"] = 0.0 if peq.verdicts_agree else 1.0
    checks += checks_from_residuals(residuals, tol.check)
    return Report("equiv-check", checks, tol.eps), None


HANDLERS = {
    "gen-group": cmd_gen_group,
    "gen-groupoid": cmd_gen_groupoid,
    "gen-random-base": cmd_gen_random_base,
    "gns": cmd_gns,
    "base-check": cmd_base_check,
    "factorize": cmd_factorize,
    "rtp": cmd_rtp,
    "phi": cmd_phi,
    "fiber": cmd_fiber,
    "morphism-check": cmd_morphism_check,
    "hopf-check": cmd_hopf_check,
    "pmu-check": cmd_pmu_check,
    "equiv-check": cmd_equiv_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--tolerance", type=float, default=None,
        help="rank-cut epsilon (default 1e-9, or QGW_TOLERANCE)",
    )
    common.add_argument(
        "--out", default=None,
        help="write the JSON result to this file instead of only printing",
    )
    reader = argparse.ArgumentParser(add_help=False)
    reader.add_argument(
        "--in", dest="infile", required=True, help="input bundle file"
    )
    gen = argparse.ArgumentParser(add_help=False)
    gen.add_argument(
        "--variant", choices=("plain", "swap", "phase"), default="plain",
        help="operator written into the bundle's pmu section",
    )
    gen.add_argument(
        "--angle", type=float, default=1e-3,
        help="phase angle for --variant phase",
    )
    gen.add_argument(
        "--hopf-perturb", type=int, default=None, metavar="SEED",
        help="inject a seeded defect into both comultiplications",
    )
    parser = argparse.ArgumentParser(
        prog="qgw",
        description="construct and certify the workbench structures",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("gen-group", parents=[common, gen],
                       help="bundle for a cyclic group")
    p.add_argument("--order", type=int, required=True)
    p = sub.add_parser("gen-groupoid", parents=[common, gen],
                       help="bundle for a pair groupoid")
    p.add_argument("--pair", type=int, required=True, metavar="UNITS")
    p = sub.add_parser("gen-random-base", parents=[common],
                       help="bundle for a seeded random linked pair")
    p.add_argument("--blocks", required=True, help="block sizes like 2,1")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mult-left", type=int, default=1)
    p.add_argument("--mult-right", type=int, default=1)
    for name, blurb in (
        ("gns", "certify the cyclic representation of the bundled state"),
        ("base-check", "certify base standardness and its conjugation"),
        ("factorize", "certify every bundled factorization"),
        ("rtp", "build both relative squares and check their Grams"),
        ("phi", "compare the two flavors by the canonical unitary"),
        ("fiber", "fiber products on both flavors plus transport"),
        ("morphism-check", "both morphism criteria for the bundled map"),
        ("hopf-check", "comultiplication axioms on both flavors"),
        ("pmu-check", "candidate operator axioms on both flavors"),
        ("equiv-check", "flavor-equivalence suite for the bundle"),
    ):
        sub.add_parser(name, parents=[common, reader], help=blurb)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    payload = None
    try:
        tol = resolve_tolerance(args.tolerance)
        report, payload = HANDLERS[args.command](args, tol)
    except FormatError as exc:
        report = Report(args.command, [], 0.0, error=str(exc))
    except QgwError as exc:
        report = Report(
            args.command, [], 0.0,
            error=f"{type(exc).__name__}: {exc}",
        )
    report.timing_ms = (time.perf_counter() - started) * 1000.0
    out_path = getattr(args, "out", None)
    if out_path and report.verdict != "error":
        content = payload if payload is not None else report.to_json()
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(content)
        sys.stdout.write(report.render_text())
    elif payload is not None and report.verdict != "error":
        sys.stdout.write(payload)
    else:
        sys.stdout.write(report.render_text())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
