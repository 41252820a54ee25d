"""Command-line interface.

Subcommands ``quantize``, ``symbol``, ``spectrum``, ``isotope`` and ``povm``
write CSV (comma separated, 17 significant digits) to ``--out`` or stdout.
Every file starts with comment lines recording the tool version and the
sha256 of the effective configuration, then a header row.

Exit codes: 0 success, 2 usage or parse error, 3 numeric failure,
4 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import re
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, bundled_config_path, load_config, potential_from_dict
from .convolution import ConfigurationError, Harmonic, SmoothingDomainError, natural_length
from .convolution import build_canonical_hamiltonian, build_hamiltonian
from .fock import PhaseSpaceScales
from .quantize import (
    ParseError,
    Polynomial,
    QuadratureRule,
    RadialAngular,
    cs_quantize_polynomial,
    default_rule,
    integral_quantize,
    lower_symbol,
    povm_positivity_check,
)
from .spectra import MAX_DIM, ConvergenceError, harmonic_reference, spectrum
from .spectroscopy import isotopic_displacement

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CONVERGENCE = 0, 2, 3, 4

_NAMED = ("harmonic", "gaussian", "morse", "inverse_sqrt", "step")
_CALL = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# formatting


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0.0:
        x = 0.0  # no negative zero in output
    return f"{x:.17g}"


def render_csv(header: Sequence[str], rows, meta: dict, digest: str) -> str:
    buf = io.StringIO()
    buf.write(f"# csquant {__version__} config-sha256={digest}\n")
    for key, val in meta.items():
        buf.write(f"# {key}={val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _digest(command: str, raw: dict, args: dict) -> str:
    blob = json.dumps({"command": command, "config": raw, "args": args}, sort_keys=True,
                      separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# function specs


def parse_function(text: str, scales: PhaseSpaceScales):
    """A polynomial in ``z, zbar`` or a named potential ``name(key=value, ...)``.

    Named potentials are functions of ``q = sqrt(2) ell Re z``.
    """
    m = _CALL.match(text)
    if m and m.group(1) in _NAMED:
        kwargs = {"type": m.group(1)}
        body = m.group(2).strip()
        if body:
            for item in body.split(","):
                if "=" not in item:
                    raise ParseError(f"expected key=value in {text!r}, got {item.strip()!r}")
                key, val = (s.strip() for s in item.split("=", 1))
                try:
                    kwargs[key] = float(val)
                except ValueError:
                    raise ParseError(f"{key}: {val!r} is not a number") from None
        try:
            pot = potential_from_dict(kwargs)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad parameters for {m.group(1)}: {exc}") from None
        root2l = math.sqrt(2) * scales.ell
        return RadialAngular(lambda r, th: pot(root2l * r * np.cos(th)), harmonics=0,
                             decay="polynomial", real=True)
    return Polynomial.parse(text)


def _quantize(f, n: int, s: float, rule: QuadratureRule | None):
    if not -1.0 <= s <= 0.0:
        raise UsageError(f"--s must lie in [-1, 0] for quantization, got {s}")
    if isinstance(f, RadialAngular) and rule is None:
        # non-polynomial symbols: resolve every harmonic the matrix can hold
        rule = QuadratureRule(2 * n + 32, 4 * n + 1)
    if isinstance(f, Polynomial) and s == -1.0 and rule is None:
        return cs_quantize_polynomial(f, n), "closed-form"
    rule = default_rule(f, n) if rule is None else rule
    op = integral_quantize(f, s, n, rule)
    return op, f"{rule.radial_count}x{rule.angular_count}"


def _float(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{name}: {text!r} is not a number") from None


def _float_list(text: str, name: str) -> list[float]:
    return [_float(t, name) for t in text.split(",") if t.strip()]


def _linspace(text: str, name: str) -> np.ndarray:
    parts = _float_list(text, name)
    if len(parts) != 3 or parts[2] < 1 or parts[2] != int(parts[2]):
        raise UsageError(f"{name} must be 'lo,hi,count'")
    return np.linspace(parts[0], parts[1], int(parts[2]))


# ---------------------------------------------------------------------------
# commands


def _common(cfg: RunConfig, args) -> tuple[int, int | None, QuadratureRule | None]:
    n = args.N if args.N is not None else cfg.dim
    if n < 2:
        raise UsageError("-N must be >= 2")
    guard = args.guard if args.guard is not None else cfg.guard
    q = cfg.quadrature
    rule = None
    if q and q[0] and q[1]:
        rule = QuadratureRule(q[0], q[1])
    return n, guard, rule


def cmd_quantize(cfg: RunConfig, args):
    n, _, rule = _common(cfg, args)
    s = -1.0 if args.s is None else _float(args.s, "--s")
    f = parse_function(args.function, cfg.scales())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        op, how = _quantize(f, n, s, rule)
    notes = sorted({str(w.message) for w in caught} | set(op.warnings))
    m = op.matrix
    if not np.all(np.isfinite(m)):
        raise FloatingPointError("quantized matrix has non-finite entries")
    # real grid first, then imaginary grid; one matrix row per CSV row
    rows = [("re", i, *m[i].real) for i in range(n)] + [("im", i, *m[i].imag) for i in range(n)]
    meta = {"function": args.function, "N": n, "s": fmt(s), "quadrature": how,
            "warnings": "; ".join(notes) or "none"}
    return ["part", "row", *(f"c{j}" for j in range(n))], rows, meta


def cmd_symbol(cfg: RunConfig, args):
    n, _, rule = _common(cfg, args)
    s = -1.0 if args.s is None else _float(args.s, "--s")
    f = parse_function(args.function, cfg.scales())
    xs, ys = _linspace(args.re, "--re"), _linspace(args.im, "--im")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        op, how = _quantize(f, n, s, rule)
        rows = []
        for x in xs:
            for y in ys:
                z = complex(x, y)
                lo = lower_symbol(op.matrix, z)
                cl = complex(np.asarray(f(z)))
                rows.append((x, y, lo.real, lo.imag, cl.real, cl.imag))
    notes = sorted({str(w.message) for w in caught})
    meta = {"function": args.function, "N": n, "s": fmt(s), "quadrature": how,
            "warnings": "; ".join(notes) or "none"}
    return ["re_z", "im_z", "symbol_re", "symbol_im", "classical_re", "classical_im"], rows, meta


def _basis_length(h: dict, spec):
    bl = h.get("basis_length", "auto")
    if bl == "ell":
        return None
    if bl == "auto":
        if spec.potential is None:
            return None
        return natural_length(spec.potential, spec.mass, spec.scales.hbar)
    return float(bl)


def cmd_spectrum(cfg: RunConfig, args):
    spec, h = cfg.hamiltonian()
    _, guard, _ = _common(cfg, args)
    k = int(h.get("levels", 5))
    tol = float(h.get("tol", 1e-9))
    start = args.N
    bl = _basis_length(h, spec)
    header = ["n", "energy", "converged", "delta", "canonical", "offset", "reference"]
    meta = {"levels": k, "tol": fmt(tol), "basis_length": fmt(bl if bl is not None else spec.scales.ell)}
    offset0 = (spec.rest_energy + spec.classical_proper_energy if spec.include_rest_mass
               else spec.scales.hbar ** 2 / (4 * spec.mass * spec.scales.ell ** 2)
               + spec.classical_proper_energy)
    if spec.potential is None and spec.vector_potential is None:
        meta["note"] = "free particle: continuous spectrum, only the proper-energy offset is reported"
        rows = [(i, None, False, None, None, offset0, None) for i in range(k)]
        return header, rows, meta
    top = int(h.get("max_dim", MAX_DIM))
    cs = spectrum(lambda n: build_hamiltonian(spec, n, basis_length=bl, guard=guard), k, tol, start, top)
    can = spectrum(lambda n: build_canonical_hamiltonian(spec, n, basis_length=bl, guard=guard),
                   k, tol, start, top)
    ref = [None] * k
    if isinstance(spec.potential, Harmonic) and spec.vector_potential is None and spec.include_rest_mass:
        omega = math.sqrt(spec.potential.k / spec.mass)
        ref = list(harmonic_reference(spec.mass, omega, spec.scales, k) + spec.classical_proper_energy)
    meta["dims"] = f"{cs.dims[0]}->{cs.dims[1]}"
    rows = [(i, cs.eigenvalues[i], bool(cs.converged[i]), cs.deltas[i], can.eigenvalues[i],
             cs.eigenvalues[i] - can.eigenvalues[i], ref[i]) for i in range(k)]
    return header, rows, meta


def cmd_isotope(cfg: RunConfig, args):
    system, pair, s = cfg.band_system()
    if args.rho is not None:
        from .spectroscopy import IsotopePair

        pair = IsotopePair.from_rho(_float(args.rho, "--rho"), pair.mu)
    n_lower = int(s.get("n_lower", 0))
    uppers = [int(v) for v in s.get("n_upper", range(5))]
    observed = list(s.get("observed", []))
    cols = {c: isotopic_displacement(system, pair, uppers, n_lower, c) for c in ("QM", "CS", "BS")}
    rows = []
    for i, nu in enumerate(uppers):
        obs = observed[i] if i < len(observed) else None
        rows.append((f"{nu}-{n_lower}", obs, cols["QM"][i], cols["CS"][i], cols["BS"][i]))
    meta = {"molecule": s.get("molecule", ""), "band": s.get("band", ""), "rho": fmt(pair.rho),
            "orientation": "isotopologue minus reference"}
    return ["band", "observed", "qm", "cs", "bs"], rows, meta


def cmd_povm(cfg: RunConfig, args):
    n = args.N if args.N is not None else 64
    grid = _float_list(args.s, "--s") if args.s else [-2.0, -1.0, -0.5, 0.0]
    rows = []
    for s in grid:
        if not s < 1:
            raise UsageError(f"the kernel needs s < 1, got {s}")
        rep = povm_positivity_check(s, n)
        rows.append((s, rep.min_eigenvalue, rep.is_positive))
    return ["s", "min_entry", "positive"], rows, {"N": n}


COMMANDS = {
    "quantize": cmd_quantize,
    "symbol": cmd_symbol,
    "spectrum": cmd_spectrum,
    "isotope": cmd_isotope,
    "povm": cmd_povm,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="PATH", help="output CSV (default: stdout)")
    common.add_argument("-N", type=int, help="truncation dimension (spectrum: starting dimension)")
    common.add_argument("--s", help="ordering parameter (povm: comma-separated list)")
    common.add_argument("--guard", type=int, help="extra levels used for assembly")

    p = argparse.ArgumentParser(prog="csquant", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"csquant {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    q = sub.add_parser("quantize", parents=[common], help="dump the matrix of a quantized symbol")
    q.add_argument("function", help='polynomial such as "z^2 zbar + 0.5" or e.g. "gaussian(depth=1,width=1)"')
    y = sub.add_parser("symbol", parents=[common], help="lower symbol of a quantized function on a grid")
    y.add_argument("function")
    y.add_argument("--re", default="-1,1,5", help="lo,hi,count for Re z")
    y.add_argument("--im", default="-1,1,5", help="lo,hi,count for Im z")
    sub.add_parser("spectrum", parents=[common], help="low-lying CS and canonical spectra")
    i = sub.add_parser("isotope", parents=[common], help="isotopic displacement table")
    i.add_argument("--rho", help="override the isotope ratio rho")
    i.add_argument("--bundled", action="store_true", help="use the bundled BO alpha-band config")
    sub.add_parser("povm", parents=[common], help="positivity of the displaced kernels over s")
    return p


def _load(args) -> RunConfig:
    if getattr(args, "bundled", False):
        return load_config(bundled_config_path())
    if args.config:
        return load_config(args.config)
    if args.command in ("spectrum", "isotope"):
        raise UsageError(f"{args.command} needs --config")
    return load_config({})


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    err = sys.stderr
    try:
        cfg = _load(args)
    except (ConfigError, UsageError) as exc:
        print(f"csquant: {exc}", file=err)
        return EXIT_USAGE
    try:
        header, rows, meta = COMMANDS[args.command](cfg, args)
        rows = list(rows)
    except (ParseError, UsageError, ConfigError, ConfigurationError) as exc:
        print(f"csquant: {exc}", file=err)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"csquant: {exc}", file=err)
        return EXIT_CONVERGENCE
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError, SmoothingDomainError,
            ValueError) as exc:
        print(f"csquant: numeric failure: {exc}", file=err)
        return EXIT_NUMERIC
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "config")}
    text = render_csv(header, rows, meta, _digest(args.command, cfg.raw, opts))
    out = args.out or cfg.output_path
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
