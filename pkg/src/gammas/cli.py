"""Command line interface: ``gamma --set 2,3 <command> ...``.

Exit codes: 0 success, 1 mathematical failure (invalid endomorphism,
oracle mismatch, not a candidate), 2 parse error, 3 I/O or schema error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import random
import sys
from fractions import Fraction

from . import finitemodel as F
from . import group as G
from . import morphism as H
from . import twisted as T
from .algebra import NotInRing, as_matrix

logger = logging.getLogger("gammas")

EXIT_OK, EXIT_MATH, EXIT_PARSE, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit(args, payload: dict, table: list[str]):
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(table))


def _read_json(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    try:
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}", EXIT_IO) from None


def _load_endo(path: str, spec: G.GroupSpec) -> tuple[H.Endomorphism, str]:
    obj, digest = _read_json(path)
    try:
        return H.endo_from_json(obj, spec), digest
    except (ValueError, TypeError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_IO) from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args, spec: G.GroupSpec) -> int:
    try:
        word = G.parse_word(args.word, spec)
    except G.ParseError as exc:
        print(f"parse error: {exc.message}", file=sys.stderr)
        print(exc.caret(), file=sys.stderr)
        return EXIT_PARSE
    g = G.evaluate(word, spec)
    is_id = g == G.identity(spec)
    payload = {"word": args.word, "element": G.element_to_json(g), "identity": is_id}
    table = [f"q = {g.q}", f"v = {list(g.v)}"] + (["(identity)"] if is_id else [])
    _emit(args, payload, table)
    return EXIT_OK


def cmd_endo_check(args, spec: G.GroupSpec) -> int:
    e, _ = _load_endo(args.endo_file, spec)
    report = H.validate(e)
    payload = {"validation": report.to_json()}
    table = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + ("" if c.passed else f"   discrepancy {c.discrepancy}") for c in report.checks]
    if report.ok:
        cand = H.is_automorphism_candidate(report.endomorphism)
        payload["candidate"] = cand.to_json()
        table.append(f"candidate: {'PASS' if cand.passed else 'FAIL'}")
        table += [f"  {note}" for note in cand.notes]
        if cand.inverse is not None:
            inv = cand.inverse
            table.append(f"  inverse: r = {inv.r}, images = {[str(g) for g in inv.images]}")
    else:
        table.append("relators not preserved: not an endomorphism")
    _emit(args, payload, table)
    return EXIT_OK if report.ok else EXIT_MATH


def cmd_certify(args, spec: G.GroupSpec) -> int:
    e, digest = _load_endo(args.endo_file, spec)
    if args.count < 1:
        raise CliError("--count must be positive", EXIT_PARSE)
    report = H.validate(e)
    if not report.ok:
        print("relators not preserved: not an endomorphism", file=sys.stderr)
        return EXIT_MATH
    try:
        cert = T.certify_r_infinite(report.endomorphism, args.count)
    except T.NotCandidate as exc:
        print(f"not an automorphism candidate: {exc}", file=sys.stderr)
        return EXIT_MATH
    out = cert.to_json()
    out["input_sha256"] = digest
    code = EXIT_OK
    if args.verify:
        result = T.verify_certificate(T.certificate_from_json(out, spec))
        out["verification"] = result.to_json()
        code = EXIT_OK if result.ok else EXIT_MATH
    text = json.dumps(out, indent=2)
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise CliError(f"cannot write {args.output}: {exc.strerror}", EXIT_IO) from None
        summary = [f"wrote certificate with {cert.count} witnesses to {args.output}"]
        if args.verify:
            summary.append(f"verification: {'ok' if out['verification']['ok'] else 'FAILED'}")
        print("\n".join(summary) if args.format == "table" else json.dumps({"output": args.output, "count": cert.count, "verified": out.get("verification", {}).get("ok")}))
    elif args.format == "json":
        print(text)
    else:
        print(f"R(phi) >= {cert.count}: witnesses t1^0 .. t1^{cert.count - 1}")
        print(f"invariants: {cert.invariant_values[0]} .. {cert.invariant_values[-1]} (pairwise distinct)")
        if args.verify:
            print(f"verification: {'ok' if out['verification']['ok'] else 'FAILED'}")
    return code


def _oracle_one(args, model, fe) -> tuple[dict, list[str], bool]:
    checks = args.checks or ["classes", "exact", "sum"]
    dec = F.enumerate_twisted_classes(model, fe, with_twisters="classes" in checks)
    payload = {"endo": {"r": fe.r, "q": list(fe.q), "w": [list(w) for w in fe.w]}}
    table = [f"r = {fe.r}, q = {list(fe.q)}, w = {[list(w) for w in fe.w]}"]
    ok = True
    if "classes" in checks:
        twisters_ok = F.verify_twisters(model, fe, dec)
        ok &= twisters_ok and sum(dec.sizes) == model.order
        payload["classes"] = dec.to_json(model) | {"twisters_verified": twisters_ok}
        table.append(f"  twisted classes: {dec.count} (twisters verified: {twisters_ok})")
    if "exact" in checks:
        seq = F.check_exact_sequence(model, fe, dec)
        ok &= seq.ok
        payload["exact_sequence"] = seq.to_json()
        table.append(
            f"  exact sequence: {'ok' if seq.ok else 'FAIL'} "
            f"(R(phi')={seq.r_prime}, R(phi)={seq.r_phi}, R(phi_bar)={seq.r_bar})"
        )
    if "sum" in checks:
        formula = F.check_sum_formula(model, fe, dec)
        ok &= formula.ok
        payload["sum_formula"] = formula.to_json()
        flag = " [Fix nontrivial: orbit-corrected]" if formula.fix_nontrivial else ""
        table.append(
            f"  sum formula: {'ok' if formula.ok else 'FAIL'} "
            f"(R(phi)={formula.lhs}, corrected={formula.corrected_sum}, raw={formula.raw_sum}){flag}"
        )
    return payload, table, ok


def cmd_oracle(args, spec: G.GroupSpec) -> int:
    obj, _ = _read_json(args.model)
    try:
        model = F.model_from_json(obj, spec)
    except (F.BadModulus, F.BadPeriod, F.ModelTooLarge) as exc:
        raise CliError(f"{args.model}: {exc}", EXIT_MATH) from None
    except (ValueError, TypeError) as exc:
        raise CliError(f"{args.model}: {exc}", EXIT_IO) from None

    endos = []
    if args.endo:
        e, _ = _load_endo(args.endo, spec)
        report = H.validate(e)
        if not report.ok:
            print("relators not preserved: not an endomorphism", file=sys.stderr)
            return EXIT_MATH
        endos.append(report.endomorphism)
    if args.grid:
        rs = [Fraction(x) for x in args.r_values.split(",")]
        qs = [Fraction(x) for x in args.q_values.split(",")]
        for r in rs:
            for q in qs:
                e = H.make_endo(spec, r, [(q, spec.unit_vector(i)) for i in range(spec.k)])
                report = H.validate(e)
                if report.ok:
                    endos.append(report.endomorphism)
    if not endos:
        raise CliError("give --endo FILE and/or --grid", EXIT_PARSE)

    results, table, all_ok = [], [f"model: S={list(spec.exponents)}, m={model.m}, d={list(model.d)}, order {model.order}"], True
    for e in endos:
        try:
            fe = F.reduce_endo(e, model)
        except F.NotReducible as exc:
            raise CliError(f"cannot reduce endomorphism: {exc}", EXIT_MATH) from None
        payload, lines, ok = _oracle_one(args, model, fe)
        results.append(payload | {"ok": ok})
        table += lines
        all_ok &= ok

    out = {"model": model.to_json(), "results": results}
    if args.homomorphism_samples:
        rng = random.Random(args.seed)
        good = _check_reduction(spec, model, rng, args.homomorphism_samples)
        out["reduction_homomorphism"] = {"samples": args.homomorphism_samples, "seed": args.seed, "ok": good}
        table.append(f"reduction is a homomorphism on {args.homomorphism_samples} samples: {good}")
        all_ok &= good
    if args.certificate:
        cobj, _ = _read_json(args.certificate)
        try:
            cert = T.certificate_from_json(cobj, spec)
            cert = T.RinfCertificate(H.validated(cert.endo), cert.witnesses, cert.invariant_values, cert.transcript)
            agree = F.cross_check_certificate(cert, model)
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(f"{args.certificate}: {exc}", EXIT_IO) from None
        out["certificate_cross_check"] = agree
        table.append(f"certificate witnesses in distinct finite classes: {agree}")
        all_ok &= agree
    out["ok"] = all_ok
    _emit(args, out, table + [f"overall: {'ok' if all_ok else 'MISMATCH'}"])
    return EXIT_OK if all_ok else EXIT_MATH


def _random_element(spec: G.GroupSpec, rng: random.Random) -> G.Element:
    num = rng.randint(-50, 50)
    den = 1
    for n in spec.exponents:
        den *= n ** rng.randint(0, 3)
    return G.Element(Fraction(num, den), tuple(rng.randint(-6, 6) for _ in range(spec.k)))


def _check_reduction(spec, model, rng, samples: int) -> bool:
    for _ in range(samples):
        g, h = _random_element(spec, rng), _random_element(spec, rng)
        if model.reduce(G.mul(spec, g, h)) != model.mul(model.reduce(g), model.reduce(h)):
            return False
    return True


def cmd_abelian(args, spec: G.GroupSpec) -> int:
    try:
        M = as_matrix(json.loads(args.matrix))
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise CliError(f"matrix must be a square JSON integer matrix: {exc}", EXIT_PARSE) from None
    value = T.reidemeister_abelian(M)
    _emit(args, {"matrix": [list(r) for r in M], "reidemeister": str(value)}, [str(value)])
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gamma",
        description="Exact arithmetic and twisted conjugacy in the groups Gamma(S).",
    )
    parser.add_argument(
        "--set", "-S", dest="sets", action="append", required=True, metavar="N1,N2,...",
        help="pairwise coprime integers >= 2 (repeat the flag or give a comma list)",
    )
    parser.add_argument("--format", choices=["json", "table"], default="table")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="normal form of a word")
    p.add_argument("word")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("endo-check", help="validate an endomorphism file")
    p.add_argument("endo_file")
    p.set_defaults(func=cmd_endo_check)

    p = sub.add_parser("certify", help="infinite-Reidemeister certificate")
    p.add_argument("endo_file")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--verify", action="store_true", help="re-check the certificate after writing it")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("oracle", help="brute-force checks in a finite quotient")
    p.add_argument("--model", required=True)
    p.add_argument("--endo")
    p.add_argument("--grid", action="store_true", help="sweep a -> a^r, ti -> a^q ti over --r-values x --q-values")
    p.add_argument("--r-values", default="1,2,3")
    p.add_argument("--q-values", default="0,1,2")
    p.add_argument("--classes", dest="checks", action="append_const", const="classes")
    p.add_argument("--exact", dest="checks", action="append_const", const="exact")
    p.add_argument("--sum", dest="checks", action="append_const", const="sum")
    p.add_argument("--homomorphism-samples", type=int, default=0, metavar="K")
    p.add_argument("--certificate", help="cross-check a certificate's witnesses in the model")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("abelian", help="Reidemeister number of an integer matrix on Z^k")
    p.add_argument("matrix", help="inline JSON, e.g. '[[0,1],[1,0]]'")
    p.set_defaults(func=cmd_abelian)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    try:
        spec = G.GroupSpec.parse(",".join(args.sets))
    except G.InvalidGroupSpec as exc:
        print(f"invalid --set: {exc}", file=sys.stderr)
        return EXIT_PARSE
    logger.info("S = %s, N = %d", list(spec.exponents), spec.N)
    try:
        return args.func(args, spec)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except NotInRing as exc:
        print(exc, file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
