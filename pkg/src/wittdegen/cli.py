"""Command-line interface: ``wittdegen witt|hopf|degenerate|sweep|verify``.

Exit codes: 0 ok, 2 unsupported regime or prime, 3 verification failure, 64 usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import effmodel, hopf, witt2
from .ring_core import BaseElement, ParseError, PolyRing, expression_names, is_prime, \
    natural_key, parse_base, parse_poly

EXIT_OK = 0
EXIT_UNSUPPORTED = 2
EXIT_VERIFY = 3
EXIT_USAGE = 64

log = logging.getLogger("wittdegen")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"p must be an integer, got {text!r}") from None
    if not is_prime(p):
        raise argparse.ArgumentTypeError("p must be prime")
    return p


def _prime_list(text: str) -> list[int]:
    return [_prime(t) for t in text.split(",") if t.strip()]


def _regimes(text: str) -> list[str]:
    out = [t.strip().upper() for t in text.split(",") if t.strip()]
    bad = [r for r in out if r not in ("A", "B")]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"regimes must be drawn from A,B, got {text!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wittdegen", description="Witt vectors, twisted group schemes and "
                 "effective models of degenerating Z/p^2-actions.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("witt", help="length-2 Witt vector arithmetic")
    w.add_argument("op", choices=["add", "neg", "sub", "frobenius", "phi"])
    w.add_argument("--p", type=_prime, required=True)
    w.add_argument("--lambda", dest="lam", default="1", help="twist parameter (default 1)")
    w.add_argument("--nu", default="1", help="scalar for phi (default 1)")
    w.add_argument("--a", default="u1,u2", help="first operand 'x1,x2'")
    w.add_argument("--b", default="v1,v2", help="second operand 'y1,y2'")
    w.add_argument("--format", choices=["text", "json"], default="text")

    h = sub.add_parser("hopf", help="Hopf algebra verification")
    h.add_argument("action", choices=["check"])
    h.add_argument("--p", type=_prime, required=True)
    h.add_argument("--lambda", dest="lam", default="1")
    h.add_argument("--nu", default="1")
    h.add_argument("--format", choices=["text", "json"], default="text")

    d = sub.add_parser("degenerate", help="effective model for a conductor pair")
    d.add_argument("--p", type=_prime, required=True)
    d.add_argument("--m1", type=int, required=True)
    d.add_argument("--m2", type=int, required=True)
    d.add_argument("--format", choices=["text", "json"], default="text")

    s = sub.add_parser("sweep", help="degeneration reports over a grid of conductors")
    s.add_argument("--p-list", type=_prime_list, default=[3, 5, 7])
    s.add_argument("--regimes", type=_regimes, default=["A", "B"])
    s.add_argument("--n1-max", type=int, default=2)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)

    v = sub.add_parser("verify", help="run the identity suites per prime")
    v.add_argument("--primes", type=_prime_list, default=[3, 5, 7])
    return ap


# ---------------------------------------------------------------------------
# Rendering


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    """Leaf paths of a JSON value, e.g. ``stabilizer.order`` or ``domination[0].image``."""
    if isinstance(obj, dict) and obj:
        out = []
        for k in sorted(obj):
            out += flatten(obj[k], f"{prefix}.{k}" if prefix else k)
        return out
    if isinstance(obj, list) and obj:
        out = []
        for i, x in enumerate(obj):
            out += flatten(x, f"{prefix}[{i}]")
        return out
    return [(prefix, obj)]


_PATH_RE = re.compile(r"[^.\[\]]+|\[\d+\]")


def render_text(obj) -> str:
    return "".join(f"{path}: {json.dumps(val, ensure_ascii=False)}\n" for path, val in flatten(obj))


def parse_text(text: str):
    """Inverse of :func:`render_text`."""
    root: dict = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        path, _, raw = line.partition(": ")
        parts = [int(x[1:-1]) if x.startswith("[") else x for x in _PATH_RE.findall(path)]
        node = root
        for part, nxt in zip(parts, parts[1:] + [None]):
            if isinstance(node, list):
                node.extend([None] * (part + 1 - len(node)))
            if nxt is None:
                node[part] = json.loads(raw)
            else:
                if isinstance(node, dict):
                    node.setdefault(part, [] if isinstance(nxt, int) else {})
                elif node[part] is None:
                    node[part] = [] if isinstance(nxt, int) else {}
                node = node[part]
    return root


def _emit(obj, fmt: str) -> None:
    sys.stdout.write(dump_json(obj) + "\n" if fmt == "json" else render_text(obj))


# ---------------------------------------------------------------------------
# Commands


def _pair(text: str, ring: PolyRing) -> witt2.WittPair:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParseError(f"expected two comma-separated coordinates, got {text!r}")
    return witt2.WittPair(parse_poly(parts[0], ring), parse_poly(parts[1], ring))


def run_witt(args) -> int:
    p = args.p
    lam, nu = parse_base(args.lam, p), parse_base(args.nu, p)
    operands = [args.a] + ([args.b] if args.op in ("add", "sub") else [])
    names = []
    for t in operands:
        for part in t.split(","):
            names += [n for n in expression_names(part) if n not in names]
    ring = PolyRing(p, sorted(names, key=natural_key))
    a = _pair(args.a, ring)
    if args.op == "add":
        out = witt2.w2_add(lam, a, _pair(args.b, ring))
    elif args.op == "sub":
        out = witt2.w2_sub(lam, a, _pair(args.b, ring))
    elif args.op == "neg":
        out = witt2.w2_neg(lam, a)
    elif args.op == "frobenius":
        out = witt2.frobenius(lam, a)
    else:
        out = witt2.phi(lam, nu, a)
    if args.format == "json":
        _emit(out.to_json(), "json")
    else:
        print(out)
    return EXIT_OK


def hopf_summary(p: int, lam: BaseElement, nu: BaseElement) -> dict:
    if lam == 1 and nu == 1:
        H = hopf.make_zp2(p)  # the untwisted kernel, also defined at p = 2
    else:
        H = hopf.make_kernel(lam, nu, p)
    checks = hopf.check_all(H)
    out = {name: bool(c) for name, c in checks.items()}
    out["rank"] = H.rank
    out["fiber_class"] = (hopf.classify_fiber(hopf.special_fiber(H)).describe()
                          if H.is_integral() else "not integral")
    return out


def run_hopf(args) -> int:
    p = args.p
    out = hopf_summary(p, parse_base(args.lam, p), parse_base(args.nu, p))
    _emit(out, args.format)
    ok = all(out[k] for k in ("coassoc", "counit", "relations", "antipode"))
    return EXIT_OK if ok else EXIT_VERIFY


def degenerate_json(spec_args: tuple[int, int, int]) -> dict:
    return effmodel.degenerate(effmodel.ConductorSpec(*spec_args)).to_json()


def run_degenerate(args) -> int:
    spec = effmodel.ConductorSpec(args.p, args.m1, args.m2)
    _emit(effmodel.degenerate(spec).to_json(), args.format)
    return EXIT_OK


def sweep_specs(primes, regimes, n1_max) -> list[tuple[int, int, int]]:
    out = []
    for p in primes:
        for r in regimes:
            if r == "A":
                out.append((p, 0, -p))
            else:
                out += [(p, -p * p * n1, 0) for n1 in range(1, n1_max + 1)]
    return out


def run_sweep(args) -> int:
    specs = sweep_specs(args.p_list, args.regimes, args.n1_max)
    for s in specs:
        effmodel.ConductorSpec(*s)  # validate before doing any work
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            reports = list(ex.map(degenerate_json, specs))
    else:
        reports = [degenerate_json(s) for s in specs]
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(dump_json(reports) + "\n")
    for r in reports:
        s = r["spec"]
        print(f"p={s['p']} m1={s['m1']} m2={s['m2']}: {r['verdict']}")
    return EXIT_OK


# -- verify -----------------------------------------------------------------


LAMBDAS = ("0", "1", "pi", "1 + pi")
HOPF_GRID_LAMBDA = ("0", "1", "pi", "pi^4")
HOPF_GRID_NU = ("0", "1", "pi", "pi^2")


@dataclass
class Cell:
    status: str = "pass"
    failures: list[str] = field(default_factory=list)

    def fail(self, msg: str):
        self.status = "FAIL"
        self.failures.append(msg)


def _witt_laws(p: int) -> Cell:
    cell = Cell()
    for t in LAMBDAS:
        lam = parse_base(t, p)
        for chk in (witt2.check_associative(lam, p), witt2.check_commutative(lam, p),
                    witt2.check_identity(lam, p), witt2.check_negation(lam, p)):
            if not chk:
                cell.fail(f"lambda={t}: {chk.describe()}")
    return cell


def _cocycle(p: int) -> Cell:
    cell = Cell()
    chk = witt2.check_cocycle(p)
    if not chk:
        cell.fail(chk.describe())
    return cell


def _homs(p: int) -> Cell:
    cell = Cell()
    for t in LAMBDAS:
        lam = parse_base(t, p)
        chks = [witt2.check_hom(lambda a, lam=lam: witt2.frobenius(lam, a), lam, lam ** p, p,
                                "frobenius"),
                witt2.check_hom(lambda a, lam=lam: witt2.phi(lam, 1, a), lam, lam ** p, p, "phi")]
        for chk in chks:
            if not chk:
                cell.fail(f"lambda={t}: {chk.describe()}")
    return cell


def _hopf_cell(H: hopf.HopfPresentation, cell: Cell, tag: str) -> None:
    for name, chk in hopf.check_all(H).items():
        if not chk:
            cell.fail(f"{tag}: {chk.describe()}")
    if H.rank != H.p ** 2:
        cell.fail(f"{tag}: rank {H.rank}")


def _hopf_zp2(p: int) -> Cell:
    cell = Cell()
    _hopf_cell(hopf.make_zp2(p), cell, "Z/p^2")
    return cell


def _hopf_kernel(p: int) -> Cell:
    if p == 2:
        return Cell("skipped (p=2)")
    cell = Cell()
    for lt in HOPF_GRID_LAMBDA:
        for nt in HOPF_GRID_NU:
            _hopf_cell(hopf.make_kernel(parse_base(lt, p), parse_base(nt, p), p), cell,
                       f"K(lambda={lt}, nu={nt})")
    return cell


def example_expectations(report: dict) -> list[str]:
    """Mismatches between a report and the expected worked-example outcome."""
    s = report["spec"]
    p = s["p"]
    bad = []

    def expect(key, got, want):
        if got != want:
            bad.append(f"{key}: got {got!r}, expected {want!r}")

    if s["n1"] is None:
        expect("identified", report["identified"], {"lambda": "pi", "nu": "1"})
        expect("verdict", report["verdict"], "Torsor")
        expect("stabilizer.order", report["stabilizer"]["order"], 1)
    else:
        n1 = s["n1"]
        expect("identified", report["identified"],
               {"lambda": f"pi^{n1 * (p - 1) ** 2}", "nu": str(BaseElement.pi_power(p, n1 * (p - 1)))})
        expect("fiber_class", report["fiber_class"], "Product(AlphaP, AlphaP)")
        expect("stabilizer.ideal", report["stabilizer"]["ideal"], [f"v1*z1^{p - 1} + v2"])
        expect("stabilizer.order", report["stabilizer"]["order"], p)
        expect("verdict", report["verdict"], "FaithfulNotFree")
    expect("faithful", report["faithful"], True)
    expect("invariants_ok", report["invariants_ok"], True)
    for k, v in report.get("checks", {}).items():
        expect(f"checks.{k}", v, True)
    return bad


def _examples(p: int) -> Cell:
    if p == 2:
        return Cell("skipped (p=2)")
    cell = Cell()
    for spec in ((p, 0, -p), (p, -p * p, 0)):
        try:
            report = degenerate_json(spec)
        except effmodel.VerificationError as exc:
            cell.fail(f"{spec}: {exc}")
            continue
        for msg in example_expectations(report):
            cell.fail(f"{spec}: {msg}")
    return cell


VERIFY_COLUMNS = (("witt_laws", _witt_laws), ("cocycle", _cocycle), ("homomorphisms", _homs),
                  ("hopf_zp2", _hopf_zp2), ("hopf_kernel", _hopf_kernel),
                  ("examples", _examples))


def run_verify(args) -> int:
    rows = []
    for p in args.primes:
        log.info("verifying p=%d", p)
        rows.append((p, [(name, fn(p)) for name, fn in VERIFY_COLUMNS]))
    headers = ["p"] + [name for name, _ in VERIFY_COLUMNS]
    table = [headers] + [[str(p)] + [c.status for _, c in cells] for p, cells in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    for r in table:
        print("  ".join(x.ljust(w) for x, w in zip(r, widths)).rstrip())
    failures = [(p, name, c) for p, cells in rows for name, c in cells if c.status == "FAIL"]
    for p, name, c in failures:
        for msg in c.failures:
            print(f"p={p} {name}: {msg}")
    return EXIT_VERIFY if failures else EXIT_OK


COMMANDS = {"witt": run_witt, "hopf": run_hopf, "degenerate": run_degenerate,
            "sweep": run_sweep, "verify": run_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"wittdegen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (effmodel.UnsupportedRegime, hopf.UnsupportedPrime) as exc:
        print(f"wittdegen: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except effmodel.VerificationError as exc:
        print(f"wittdegen: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
