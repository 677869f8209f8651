"""Batch command-line front end.

Exit codes: 0 success, 1 usage error, 2 invalid or unphysical state,
3 numerical failure. Results go to ``--out`` (default stdout) as JSON or
CSV; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from typing import Iterable, List, Optional

import numpy as np

from . import entanglement as ent
from . import estimation as est
from . import gaussian_channels as gch
from . import gaussian_core as gc
from . import protocols as proto
from . import qkd
from .errors import (
    DegenerateInput,
    InvalidArgument,
    InvalidState,
    InvalidTransform,
    NumericalFailure,
)

EXIT_OK, EXIT_USAGE, EXIT_STATE, EXIT_NUMERIC = 0, 1, 2, 3
MAX_GRID = 1_000_000

_NUM = r"[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?"
_COHERENT = re.compile(rf"^coherent:([+-]?{_NUM})([+-]{_NUM})i$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- state input

def parse_state_literal(text: str) -> gc.GaussianState:
    """Parse ``vacuum[:n]``, ``coherent:<re>[+-]<im>i``, ``thermal:<nu>``,
    ``squeezed:<r>[:<phi>]`` or ``tmss:<r>``."""
    m = _COHERENT.match(text)
    if m:
        return gc.coherent_state(complex(float(m.group(1)), float(m.group(2))))
    kind, _, rest = text.partition(":")
    try:
        params = [float(v) for v in rest.split(":")] if rest else []
    except ValueError as exc:
        raise UsageError(f"bad state literal {text!r}: {exc}") from exc
    if kind == "vacuum" and len(params) <= 1:
        return gc.vacuum(int(params[0]) if params else 1)
    if kind == "thermal" and len(params) == 1:
        return gc.thermal_state(params[0])
    if kind == "squeezed" and len(params) in (1, 2):
        return gc.one_mode_squeezed_vacuum(*params)
    if kind == "tmss" and len(params) == 1:
        return gc.two_mode_squeezed_state(params[0])
    raise UsageError(f"unrecognised state literal {text!r}")


def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidState(f"{path} is not valid JSON: {exc}") from exc


def state_from_doc(doc) -> gc.GaussianState:
    if isinstance(doc, dict) and "state" in doc and "cov" not in doc:
        doc = doc["state"]
    if not isinstance(doc, dict):
        raise InvalidState("state document must be a JSON object")
    return gc.GaussianState.from_dict(doc)


def read_state(args) -> gc.GaussianState:
    if getattr(args, "in_path", None):
        return state_from_doc(load_json(args.in_path))
    if getattr(args, "input", None):
        return parse_state_literal(args.input)
    raise UsageError("a state is required: use --in FILE or --input LITERAL")


# ---------------------------------------------------------------- output

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _flatten(doc, prefix: str = "") -> dict:
    """Flatten nested dicts and lists into ``a_b_0``-style keys for CSV."""
    if isinstance(doc, dict):
        items = doc.items()
    elif isinstance(doc, list):
        items = enumerate(doc)
    else:
        return {prefix: doc}
    out = {}
    for k, v in items:
        out.update(_flatten(v, f"{prefix}_{k}" if prefix else str(k)))
    return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def to_csv(rows: List[dict], columns: Optional[List[str]] = None) -> str:
    buf = io.StringIO()
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def emit(doc, args, columns: Optional[List[str]] = None) -> None:
    doc = _plain(doc)
    if args.format == "csv":
        rows = doc if isinstance(doc, list) else [_flatten(doc)]
        text = to_csv(rows, columns)
    else:
        text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_state(args):
    s = read_state(args)
    if args.raw:
        return s.to_dict()
    physical = gc.is_physical(s)
    doc = {
        "state": s.to_dict(),
        "physical": physical,
        "pure": gc.is_pure(s),
        "symplectic_eigenvalues": gc.symplectic_eigenvalues(s),
        "mean_photon_numbers": [gc.mean_photon_number(s, k) for k in range(s.n_modes)],
    }
    if physical:
        doc["entropy"] = gc.von_neumann_entropy(s)
    return doc


def _split_arg(text: str):
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    try:
        vals = [int(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"bad --split {text!r}") from exc
    if len(vals) == 1 and "," not in text:
        return vals[0]
    return vals


def cmd_entangle(args):
    s = read_state(args)
    if args.action == "check":
        split = _split_arg(args.split)
        g = ent.giedke_separability(s, split, args.max_iter)
        doc = {"ppt": ent.is_ppt(s, split), "distillable": ent.is_distillable(s, split)}
        if s.n_modes == 2:
            doc["simon"] = ent.simon_separability(s).verdict
        doc["giedke"] = g.verdict
        doc["giedke_iterations"] = g.iterations
        return doc
    if args.action == "classify":
        return ent.classify_tripartite(s, with_giedke=True, max_iter=args.max_iter).to_dict()
    if args.action == "standard-form":
        sf = ent.standard_form(s)
        return {"n_a": sf.n_a, "n_b": sf.n_b, "k_x": sf.k_x, "k_p": sf.k_p,
                "local_transforms": list(sf.local_transforms)}
    if args.action == "symmetrize":
        out, theta = ent.symmetrize(s)
        return {"theta": theta, "state": out.to_dict(), "ppt": ent.is_ppt(out, 1)}
    raise UsageError(f"unknown entangle action {args.action}")


def _read_channel(args) -> gch.GaussianChannel:
    if args.channel:
        return gch.GaussianChannel.from_dict(load_json(args.channel))
    if args.eta is not None:
        return gch.thermal_channel(args.eta, args.nbar if args.nbar is not None else 0.0)
    raise UsageError("a channel is required: use --channel FILE or --eta/--nbar")


def cmd_channel(args):
    if args.action == "capacity":
        if args.eta is None or args.energy is None:
            raise UsageError("capacity needs --eta and --energy")
        alloc = gch.lossy_capacity_allocation(args.eta, args.energy)
        return {"capacity_nats": gch.lossy_capacity(args.eta, args.energy), "allocation": alloc}
    c = _read_channel(args)
    if args.action == "check":
        return {"completely_positive": gch.is_completely_positive(c), "channel": c.to_dict()}
    if args.action == "apply":
        s = read_state(args)
        if not gc.is_physical(s):
            raise InvalidState("input state is unphysical")
        out = gch.apply_channel(c, s)
        return out.to_dict() if args.raw else {"state": out.to_dict(), "entropy": gc.von_neumann_entropy(out)}
    raise UsageError(f"unknown channel action {args.action}")


def cmd_teleport(args):
    s = read_state(args)
    gc.require_physical(s)
    res = proto.teleport_ensemble(s, args.r)
    doc = {"fidelity": res.fidelity_coherent, "added_noise": res.added_noise, "output": res.output.to_dict()}
    if args.shots:
        if args.seed is None:
            raise UsageError("--shots requires --seed")
        rep = proto.teleport_consistency_check(s, args.r, args.seed, args.shots)
        doc["monte_carlo"] = {k: rep[k] for k in ("shots", "empirical_cov", "analytic_cov", "cov_z",
                                                  "empirical_mean", "mean_z")}
    return doc


def cmd_densecode(args):
    if args.r is not None:
        nbar = proto.dense_coding_nbar(args.r)
        sig2 = proto.dense_coding_optimal_sigma2(args.r)
        extra = {"r": args.r, "sigma2": sig2, "mutual_info": proto.dense_coding_mutual_info(sig2, args.r)}
    elif args.nbar is not None:
        nbar, extra = args.nbar, {}
    else:
        raise UsageError("densecode needs --nbar or --r")
    cd, ch = proto.dense_coding_capacity(nbar), proto.single_mode_capacity(nbar)
    doc = {"nbar": nbar, "C_dense": cd, "C_single": ch, "ratio": cd / ch if ch > 0 else float("nan")}
    doc.update(extra)
    return doc


def _detector(args) -> qkd.DetectorModel:
    if getattr(args, "detector", None):
        return qkd.DetectorModel.from_dict(load_json(args.detector))
    return qkd.DetectorModel(eta=args.eta_det, p_dark=args.dark, visibility=args.visibility,
                             alpha_db_per_km=args.alpha, beta_db=args.beta,
                             afterpulse_A=args.afterpulse_A, afterpulse_M=args.afterpulse_M)


def _keyrate_rows(args, distances: Iterable[float]):
    model = _detector(args)
    pulses = args.pulses
    return [qkd.keyrate_row(args.mu, args.mu_prime, qkd.link_transmittance(model, L), model, pulses, L)
            for L in distances]


def cmd_qkd(args):
    if args.action == "keyrate":
        if args.distance:
            rows = _keyrate_rows(args, args.distance)
        elif args.eta is not None:
            model = qkd.DetectorModel(eta=1.0, p_dark=args.dark, visibility=args.visibility)
            rows = [qkd.keyrate_row(args.mu, args.mu_prime, args.eta, model, args.pulses)]
        else:
            raise UsageError("keyrate needs --eta or --distance")
        return rows, list(qkd.KEYRATE_COLUMNS)
    if args.action == "qber":
        model = _detector(args)
        rows = []
        for L in args.distance or [0.0]:
            q = qkd.qber(model, L, args.mu)
            rows.append({"L_km": L, "e_B": q.e_b, "P_DET": q.p_det, "e_B_afterpulse": q.e_b_afterpulse})
        return rows, ["L_km", "e_B", "P_DET", "e_B_afterpulse"]
    if args.action == "distance":
        return {"max_distance_km": qkd.max_secure_distance(_detector(args), args.threshold, args.mu)}, None
    if args.action == "decoy":
        if args.in_path:
            doc = load_json(args.in_path)
            try:
                obs = qkd.DecoyObservation(**doc)
            except TypeError as exc:
                raise UsageError(f"bad observation document: {exc}") from exc
        else:
            if args.eta is None:
                raise UsageError("decoy needs --in FILE or --eta")
            obs = qkd.simulate_no_eve(args.mu, args.mu_prime, args.eta, args.dark, args.pulses)
        a = qkd.decoy_bounds_asymptotic(obs)
        doc = {"asymptotic": vars(a), "hwang": qkd.hwang_bound(obs)}
        if obs.n_pulses is not None:
            doc["finite"] = vars(qkd.decoy_bounds_finite(obs))
        return doc, None
    raise UsageError(f"unknown qkd action {args.action}")


def cmd_estimate(args):
    nbar, n = args.nbar, args.n
    doc = {"nbar": nbar, "n_copies": n, "heterodyne_mse": est.heterodyne_mse(nbar, n),
           "rld_bound_identity": est.rld_weighted_bound(np.eye(2), nbar),
           "photon_number_mse": est.photon_number_mse(nbar, n)._asdict()}
    if nbar > 0:
        f = est.fisher_matrices(nbar)
        doc["fisher"] = {"sld": f.sld, "kmb": f.kmb,
                         "rld_inverse_re": f.rld_inverse.real, "rld_inverse_im": f.rld_inverse.imag}
    if args.prior_nbar is not None:
        doc["bayes_min_mse"] = est.bayes_min_mse(nbar, args.prior_nbar)
    if args.mc_trials:
        if args.seed is None:
            raise UsageError("--mc-trials requires --seed")
        zeta = complex(args.zeta.replace("i", "j")) if args.zeta else 0j
        doc["heterodyne_mse_mc"] = est.heterodyne_mse_monte_carlo(zeta, nbar, n, args.mc_trials, args.seed)
    return doc


# ---------------------------------------------------------------- sweep

def grid_values(start: float, stop: float, step: float) -> np.ndarray:
    if not (math.isfinite(start) and math.isfinite(stop) and math.isfinite(step)) or step <= 0:
        raise UsageError("grid needs finite start/stop and a positive step")
    if stop < start:
        return np.zeros(0)
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count > MAX_GRID:
        raise UsageError(f"grid has {count} points, more than {MAX_GRID}")
    return start + step * np.arange(count)


SWEEP_COLUMNS = {
    "fidelity": ["row", "r", "fidelity", "added_noise"],
    "entropy": ["row", "r", "nu", "entropy"],
    "densecode": ["row", "nbar", "C_dense", "C_single", "ratio"],
    "capacity": ["row", "energy", "capacity"],
    "gllp": ["row", "t", "key_rate"],
    "keyrate": ["row"] + list(qkd.KEYRATE_COLUMNS),
}


def _sweep_row(args, x: float) -> dict:
    q = args.quantity
    if q == "fidelity":
        return {"r": x, "fidelity": proto.teleport_fidelity(x), "added_noise": 2 * math.exp(-2 * x)}
    if q == "entropy":
        red = gc.partial_trace(gc.two_mode_squeezed_state(x), [0])
        return {"r": x, "nu": gc.symplectic_eigenvalues(red)[0], "entropy": gc.von_neumann_entropy(red)}
    if q == "densecode":
        cd, ch = proto.dense_coding_capacity(x), proto.single_mode_capacity(x)
        return {"nbar": x, "C_dense": cd, "C_single": ch, "ratio": cd / ch if ch > 0 else float("nan")}
    if q == "capacity":
        return {"energy": x, "capacity": gch.lossy_capacity(args.eta or [1.0], x)}
    if q == "gllp":
        return {"t": x, "key_rate": qkd.gllp_key_rate(x, x, args.delta)}
    if q == "keyrate":
        return _keyrate_rows(args, [x])[0]
    raise UsageError(f"unknown sweep quantity {q}")


def cmd_sweep(args):
    xs = grid_values(args.start, args.stop, args.step)
    rows = []
    for i, x in enumerate(xs):
        if i < args.start_row:
            continue
        row = {"row": i}
        row.update(_sweep_row(args, float(x)))
        rows.append(row)
    return rows, SWEEP_COLUMNS[args.quantity]


# ---------------------------------------------------------------- parser

def _add_common(p):
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--seed", type=int, default=None)


def _add_state_input(p):
    p.add_argument("--in", dest="in_path", help="state JSON file")
    p.add_argument("--input", help="state literal, e.g. coherent:1+0i or tmss:1")


def _add_detector(p):
    p.add_argument("--detector", help="detector model JSON file")
    p.add_argument("--eta-det", type=float, default=0.1, help="detector efficiency")
    p.add_argument("--dark", type=float, default=1e-5, help="dark count probability per pulse")
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.2, help="fiber loss in dB/km")
    p.add_argument("--beta", type=float, default=0.0, help="receiver loss in dB")
    p.add_argument("--afterpulse-A", dest="afterpulse_A", type=float, default=0.0)
    p.add_argument("--afterpulse-M", dest="afterpulse_M", type=float, default=0.0)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--mu-prime", dest="mu_prime", type=float, default=None)
    p.add_argument("--pulses", type=float, default=None, help="pulses per source, enables finite-size bounds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gqit", description="Gaussian quantum information toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("state", help="inspect a Gaussian state")
    _add_common(p)
    _add_state_input(p)
    p.add_argument("--raw", action="store_true", help="emit only the state document")

    p = sub.add_parser("entangle", help="separability tests")
    p.add_argument("action", choices=["check", "classify", "standard-form", "symmetrize"])
    _add_common(p)
    _add_state_input(p)
    p.add_argument("--split", default="1", help="party A: mode count k, or comma-separated mode list")
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)

    p = sub.add_parser("channel", help="Gaussian channels")
    p.add_argument("action", choices=["apply", "check", "capacity"])
    _add_common(p)
    _add_state_input(p)
    p.add_argument("--channel", help="channel JSON file")
    p.add_argument("--eta", type=float, nargs="+", default=None)
    p.add_argument("--nbar", type=float, nargs="+", default=None)
    p.add_argument("--energy", type=float, default=None)
    p.add_argument("--raw", action="store_true")

    p = sub.add_parser("teleport", help="coherent-state teleportation")
    _add_common(p)
    _add_state_input(p)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--shots", type=int, default=0)

    p = sub.add_parser("densecode", help="dense coding capacities")
    _add_common(p)
    p.add_argument("--nbar", type=float)
    p.add_argument("--r", type=float)

    p = sub.add_parser("qkd", help="decoy-state BB84")
    p.add_argument("action", choices=["keyrate", "qber", "distance", "decoy"])
    _add_common(p)
    _add_detector(p)
    p.add_argument("--in", dest="in_path", help="decoy observation JSON")
    p.add_argument("--eta", type=float, default=None, help="overall channel transmittance")
    p.add_argument("--distance", type=float, nargs="+", default=None)
    p.add_argument("--threshold", type=float, default=0.11)

    p = sub.add_parser("estimate", help="estimation figures for displaced thermal states")
    _add_common(p)
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--prior-nbar", dest="prior_nbar", type=float, default=None)
    p.add_argument("--mc-trials", dest="mc_trials", type=int, default=0)
    p.add_argument("--zeta", default=None, help="true amplitude, e.g. 1+0.5i")

    p = sub.add_parser("sweep", help="tabulate a quantity over a 1-D grid")
    _add_common(p)
    _add_detector(p)
    p.add_argument("--quantity", choices=sorted(SWEEP_COLUMNS), required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--start-row", dest="start_row", type=int, default=0, help="skip rows before this index")
    p.add_argument("--eta", type=float, nargs="+", default=None, help="transmittivities for capacity")
    p.add_argument("--delta", type=float, default=0.0, help="tagged fraction for gllp")
    return parser


COMMANDS = {
    "state": cmd_state,
    "entangle": cmd_entangle,
    "channel": cmd_channel,
    "teleport": cmd_teleport,
    "densecode": cmd_densecode,
    "qkd": cmd_qkd,
    "estimate": cmd_estimate,
    "sweep": cmd_sweep,
}
TABULAR = {"qkd", "sweep"}


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        result = COMMANDS[args.command](args)
        if args.command in TABULAR:
            doc, columns = result
            if args.format == "csv" and isinstance(doc, dict):
                doc = [_flatten(_plain(doc))]
                columns = None
            emit(doc, args, columns)
        else:
            emit(result, args)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidState as exc:
        print(f"invalid state: {exc}", file=sys.stderr)
        return EXIT_STATE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidArgument, InvalidTransform, DegenerateInput) as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
