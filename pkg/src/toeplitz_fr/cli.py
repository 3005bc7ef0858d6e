"""Command-line front end: every subcommand prints exactly one JSON report.

Exit codes: 0 definite positive outcome, 1 definite negative outcome with a
certificate, 2 unknown, 64 usage error, 65 malformed input.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, Optional

import numpy as np

from . import __version__, jsonio
from .circulant import circulant_corner_test
from .duality import (
    FrLinearMap,
    ToeplitzFRTensor,
    cp_test,
    embed,
    pair,
    positive_map_test_toeplitz_domain,
    toeplitz_extension,
    truncate,
    universal_toeplitz,
)
from .errors import (
    InputFormatError,
    NoConvergence,
    NotNonnegative,
    NotPositive,
    ToeplitzFRError,
)
from .fejer_riesz import BivariateTrigPoly, TrigPoly, fejer_riesz_factorize, is_nonneg_on_circle
from .numerics import hermitian_eigendecompose
from .separability import gurvits_decompose, moment_extension, separate_2xN, toeplitz_circulant_separate
from .toeplitz import (
    BlockToeplitz,
    ToeplitzMatrix,
    caratheodory_decompose,
    conv_hull_matrix,
    conv_hull_membership,
    r_n_separable_decomposition,
)
from .witness import (
    entanglement_certify,
    sep_star_test_2x2,
    sep_star_test_fr_fr,
    sep_star_test_toeplitz_toeplitz,
    verify_certificate,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_UNKNOWN, EXIT_USAGE, EXIT_FORMAT = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _plain(obj):
    """JSON fallback for numpy values; complex numbers become ``[re, im]``."""
    if isinstance(obj, np.ndarray):
        return jsonio.encode_complex_array(obj) if np.iscomplexobj(obj) else obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _load(path: Optional[str], what: str) -> dict:
    if path is None:
        raise UsageError(f"--{what} is required")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _pick(args, key: str, flag: str, parse):
    """A part of the input: the combined ``--input`` file wins over the per-factor file."""
    if args.input is not None:
        doc = _load(args.input, "input")
        if isinstance(doc, dict) and key in doc:
            return parse(doc[key])
    return parse(_load(getattr(args, flag), flag.replace("_", "-")))


# Each command returns (exit code, outcome, inputs used for the hash).


def cmd_psd(args):
    doc = _load(args.input, "input")
    raw = doc["matrix"] if isinstance(doc, dict) and "matrix" in doc else doc
    h = jsonio.decode_complex_array(raw, 2)
    eig = hermitian_eigendecompose(h)
    lo = float(eig.eigenvalues[0])
    passes = lo >= -args.tol
    outcome = {"passes": passes, "min_eigenvalue": lo, "tolerance_used": args.tol}
    if not passes:
        outcome["violating_vector"] = eig.vectors[:, 0]
    return (EXIT_OK if passes else EXIT_NEGATIVE), outcome, doc


def cmd_carath(args):
    doc = _load(args.input, "input")
    t = ToeplitzMatrix.from_json(doc)
    try:
        dec = caratheodory_decompose(t, args.tol)
    except NotPositive as exc:
        return EXIT_NEGATIVE, {"positive": False, "reason": str(exc)}, doc
    return EXIT_OK, {"positive": True, "decomposition": dec.to_json()}, doc


def cmd_fr_factor(args):
    doc = _load(args.input, "input")
    f = TrigPoly.from_json(doc)
    try:
        sf = fejer_riesz_factorize(f, args.tol)
    except NotNonnegative:
        rep = is_nonneg_on_circle(f, args.tol)
        return EXIT_NEGATIVE, {"factored": False, "nonneg": rep.to_json()}, doc
    return EXIT_OK, {"factored": True, "factor": sf.to_json()}, doc


def cmd_fr_nonneg(args):
    doc = _load(args.input, "input")
    rep = is_nonneg_on_circle(TrigPoly.from_json(doc), args.tol)
    return (EXIT_OK if rep.nonneg else EXIT_NEGATIVE), rep.to_json(), doc


def cmd_gurvits(args):
    doc = _load(args.input, "input")
    x = BlockToeplitz.from_json(doc)
    try:
        dec = gurvits_decompose(x, args.tol)
    except NotPositive as exc:
        return EXIT_NEGATIVE, {"positive": False, "reason": str(exc)}, doc
    return (EXIT_OK if dec.verified else EXIT_UNKNOWN), dec.to_json(), doc


def cmd_sep2(args):
    doc = _load(args.input, "input")
    a = ToeplitzMatrix.from_json(jsonio.require(doc, "a", dict))
    c = ToeplitzMatrix.from_json(jsonio.require(doc, "c", dict))
    try:
        dec = separate_2xN(a, c, args.tol)
    except NotPositive as exc:
        return EXIT_NEGATIVE, {"positive": False, "reason": str(exc)}, doc
    scale = max(1.0, float(np.linalg.norm(a.coeffs)) + float(np.linalg.norm(c.coeffs)))
    ok = dec.residual <= 1e-7 * scale
    return (EXIT_OK if ok else EXIT_UNKNOWN), dec.to_json(), doc


def cmd_circ_sep(args):
    doc = _load(args.input, "input")
    x = BlockToeplitz.from_json(doc)
    try:
        dec = toeplitz_circulant_separate(x, args.theta, args.tol)
    except NotPositive as exc:
        return EXIT_NEGATIVE, {"positive": False, "reason": str(exc)}, doc
    return (EXIT_OK if dec.verified else EXIT_UNKNOWN), dec.to_json(), doc


def cmd_extend(args):
    doc = _load(args.input, "input")
    x0 = ToeplitzMatrix.from_json(jsonio.require(doc, "x0", dict))
    x1 = ToeplitzMatrix.from_json(jsonio.require(doc, "x1", dict))
    try:
        ext = moment_extension(x0, x1, args.n, args.tol)
    except NotPositive as exc:
        return EXIT_NEGATIVE, {"positive": False, "reason": str(exc)}, doc
    return EXIT_OK, {"extension": ext.to_json()}, doc


def _load_map(args) -> tuple[FrLinearMap, dict]:
    path = args.map if args.map is not None else args.input
    doc = _load(path, "map")
    return FrLinearMap.from_json(doc), doc


def cmd_cp_check(args):
    phi, doc = _load_map(args)
    rep = cp_test(phi, args.tol, args.grid or 1024)
    outcome = rep.to_json()
    if rep.vector is not None:
        v = rep.vector
        v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))  # largest entry real positive
        outcome["vector"] = v
    return (EXIT_OK if rep.completely_positive else EXIT_NEGATIVE), outcome, doc


def cmd_pos_check(args):
    phi, doc = _load_map(args)
    rep = positive_map_test_toeplitz_domain(phi, args.grid or 720, args.tol)
    return (EXIT_OK if rep.positive else EXIT_NEGATIVE), rep.to_json(), doc


def cmd_pair(args):
    t = _pick(args, "toeplitz", "toeplitz", ToeplitzMatrix.from_json)
    f = _pick(args, "trigpoly", "trigpoly", TrigPoly.from_json)
    value = pair(t, f)
    return EXIT_OK, {"value": value}, {"toeplitz": t.to_json(), "trigpoly": f.to_json()}


def cmd_sepstar(args):
    doc = _load(args.input, "input")
    if isinstance(doc, dict) and "a" in doc and "b" in doc:
        a = ToeplitzMatrix.from_json(doc["a"])
        b = ToeplitzMatrix.from_json(doc["b"])
        rep = sep_star_test_2x2(a, b, args.grid or 720, args.tol)
    else:
        rep = sep_star_test_toeplitz_toeplitz(BlockToeplitz.from_json(doc), args.grid or 24, args.tol)
    return (EXIT_OK if rep.member else EXIT_NEGATIVE), rep.to_json(), doc


def cmd_sepstar_fr(args):
    doc = _load(args.input, "input")
    rep = sep_star_test_fr_fr(BivariateTrigPoly.from_json(doc), args.grid or 256, args.tol)
    return (EXIT_OK if rep.member else EXIT_NEGATIVE), rep.to_json(), doc


def cmd_witness(args):
    if args.verify is not None:
        doc = _load(args.verify, "verify")
        cert = doc.get("certificate", doc.get("outcome", {}).get("certificate", doc)) if isinstance(doc, dict) else doc
        if not isinstance(cert, dict):
            raise InputFormatError("certificate must be a JSON object")
        try:
            out = verify_certificate(cert)
        except (KeyError, TypeError) as exc:
            raise InputFormatError(f"incomplete certificate: {exc}") from None
        return (EXIT_NEGATIVE if out["valid"] else EXIT_UNKNOWN), {"verification": out}, cert
    if args.universal is not None:
        x = universal_toeplitz(args.universal)
    else:
        x = ToeplitzFRTensor.from_json(_load(args.input, "input"))
    lam_grid = args.grid or 48
    res = entanglement_certify(x, lam_grid=lam_grid, tol=min(args.tol, 1e-9))
    code = {"separable": EXIT_OK, "entangled": EXIT_NEGATIVE}.get(res.status, EXIT_UNKNOWN)
    return code, res.to_json(), x.to_json()


def cmd_rn_decompose(args):
    dec = r_n_separable_decomposition(args.n)
    outcome = dec.to_json()
    outcome["q"] = dec.meta["q"]
    outcome["atom_count"] = len(dec.atoms)
    ok = dec.residual <= 1e-11
    return (EXIT_OK if ok else EXIT_UNKNOWN), outcome, {"n": args.n}


def cmd_truncate(args):
    doc = _load(args.input, "input")
    t = truncate(ToeplitzMatrix.from_json(doc), args.n)
    return EXIT_OK, {"toeplitz": t.to_json()}, doc


def cmd_extend_toeplitz(args):
    doc = _load(args.input, "input")
    t = ToeplitzMatrix.from_json(doc)
    try:
        ext = toeplitz_extension(t, args.m, args.tol)
    except NotPositive as exc:
        return EXIT_NEGATIVE, {"positive": False, "reason": str(exc)}, doc
    corner = float(np.max(np.abs(truncate(ext, t.n).coeffs - t.coeffs)))
    return EXIT_OK, {"toeplitz": ext.to_json(), "corner_residual": corner}, doc


def cmd_corner_test(args):
    zeta = complex(args.zeta[0], args.zeta[1])
    res = circulant_corner_test(zeta, args.m, min(args.tol, 1e-9))
    outcome = {"feasible": res.feasible, "zeta": zeta, "m": args.m}
    if res.feasible:
        outcome["circulant"] = res.circulant.to_json()
        outcome["spectrum_weights"] = res.lp.weights
    else:
        outcome["farkas"] = res.lp.farkas
        outcome["farkas_margin"] = res.lp.margin
    return (EXIT_OK if res.feasible else EXIT_NEGATIVE), outcome, {"zeta": zeta, "m": args.m}


def cmd_conv_hull(args):
    doc = _load(args.input, "input")
    raw = doc["xi"] if isinstance(doc, dict) and "xi" in doc else doc
    xi = jsonio.decode_complex_array(raw, 1)
    member, dec = conv_hull_membership(xi, args.tol)
    if member:
        return EXIT_OK, {"member": True, "decomposition": dec.to_json()}, doc
    eig = hermitian_eigendecompose(conv_hull_matrix(xi))
    outcome = {"member": False, "min_eigenvalue": float(eig.eigenvalues[0]), "violating_vector": eig.vectors[:, 0]}
    return EXIT_NEGATIVE, outcome, doc


COMMANDS: dict[str, tuple[Callable, str]] = {
    "psd": (cmd_psd, "PSD check of a Hermitian matrix"),
    "carath": (cmd_carath, "Caratheodory decomposition of a positive Toeplitz matrix"),
    "fr-factor": (cmd_fr_factor, "spectral factor of a nonnegative trigonometric polynomial"),
    "fr-nonneg": (cmd_fr_nonneg, "nonnegativity of a trigonometric polynomial on the circle"),
    "gurvits": (cmd_gurvits, "separable decomposition of a positive block-Toeplitz matrix"),
    "sep2": (cmd_sep2, "separable decomposition of [[a, c*], [c, a]]"),
    "circ-sep": (cmd_circ_sep, "separable decomposition with circulant blocks"),
    "extend": (cmd_extend, "extend [[x0, x1*], [x1, x0]] to n x n blocks"),
    "cp-check": (cmd_cp_check, "complete positivity of a map on polynomials"),
    "pos-check": (cmd_pos_check, "positivity of a map on Toeplitz matrices"),
    "pair": (cmd_pair, "duality pairing <T, f>"),
    "sepstar": (cmd_sepstar, "block-positivity for Toeplitz (x) Toeplitz"),
    "sepstar-fr": (cmd_sepstar_fr, "block-positivity for polynomial (x) polynomial"),
    "witness": (cmd_witness, "separability LP or entanglement certificate for Toeplitz (x) polynomial"),
    "rn-decompose": (cmd_rn_decompose, "separable decomposition of R_n"),
    "truncate": (cmd_truncate, "leading n x n corner of a Toeplitz matrix"),
    "extend-toeplitz": (cmd_extend_toeplitz, "positive Toeplitz extension to size m"),
    "corner-test": (cmd_corner_test, "is [[1, conj zeta], [zeta, 1]] a corner of a positive circulant"),
    "conv-hull": (cmd_conv_hull, "membership in the convex hull of moment points"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-8, help="tolerance (default 1e-8)")
    common.add_argument("--grid", type=int, default=None, help="grid size (default per command)")
    common.add_argument("--seed", type=int, default=0, help="seed recorded in the report (default 0)")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--input", default=None, help="input JSON file (combined form)")

    parser = _Parser(prog="toeplitz-fr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name in ("extend", "truncate", "rn-decompose"):
            p.add_argument("--n", type=int, required=True)
        if name in ("extend-toeplitz", "corner-test"):
            p.add_argument("--m", type=int, required=True)
        if name == "circ-sep":
            p.add_argument("--theta", type=float, default=0.0)
        if name in ("cp-check", "pos-check"):
            p.add_argument("--map", default=None, help="FrLinearMap JSON file")
        if name == "pair":
            p.add_argument("--toeplitz", default=None, help="ToeplitzMatrix JSON file")
            p.add_argument("--trigpoly", default=None, help="TrigPoly JSON file")
        if name == "witness":
            p.add_argument("--universal", type=int, default=None, help="certify T_n for this n")
            p.add_argument("--verify", default=None, help="re-check a certificate JSON file")
        if name == "corner-test":
            p.add_argument("--zeta", type=float, nargs=2, required=True, metavar=("RE", "IM"))
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        handler = COMMANDS[args.command][0]
        code, outcome, inputs = handler(args)
    except UsageError as exc:
        print(f"toeplitz-fr: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except NoConvergence as exc:
        print(f"toeplitz-fr: no convergence: {exc}", file=stderr)
        return EXIT_UNKNOWN
    except (ToeplitzFRError, KeyError, TypeError) as exc:
        print(f"toeplitz-fr: input error: {exc}", file=stderr)
        return EXIT_FORMAT
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "command")}
    report = {
        "command": args.command,
        "inputs_hash": jsonio.sha256_hex(json.loads(json.dumps({"inputs": inputs, "flags": flags}, default=_plain))),
        "outcome": outcome,
        "tolerances": {"tol": args.tol, "grid": args.grid},
        "seed": args.seed,
        "version": __version__,
    }
    text = json.dumps(report, default=_plain, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
