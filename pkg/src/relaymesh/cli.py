"""Command-line entry point: ``relaymesh {rate,sweep,probe,verify,threshold}``.

Exit codes: 0 success, 1 validation/usage error, 2 numerical
non-convergence, 3 failed verification suites.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as ex
from . import strategy_rates as sr
from .channel_model import PathLossModel, network_from_config
from .errors import ConvergenceWarning, RelayMeshError, SearchBoundError, ValidationError
from .gaussian_info import broadcast_cut_capacity, use_log_base

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_VERIFY = 0, 1, 2, 3

STRATEGY_FUNCS = {
    "CS": sr.cutset_single_relay,
    "DF": sr.df_single_relay,
    "CF": sr.cf_single_relay,
    "MH": sr.multihop_tdma,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for non-convergence here
    def error(self, message):
        raise _UsageExit(f"{self.format_usage()}{self.prog}: error: {message}")


class _UsageExit(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="network / sweep config (JSON)")
    common.add_argument("--out", type=Path, help="write output here instead of stdout")
    common.add_argument("--strategies", help="comma-separated subset of cs,df,cf,cf_t2,mh,cinf")
    common.add_argument("--mode", choices=sr.MODES, default=sr.FORALL, help="constraint quantifier for CF_T2")
    common.add_argument("--log-base", choices=("2", "e"), default="2", help="rates in bits (2) or nats (e)")
    common.add_argument("--db", action="store_true", help="powers, noises and gains in the config are in dB")
    common.add_argument("--relay-cap", type=int, default=sr.DEFAULT_RELAY_CAP, help="max relays for CF_T2")
    common.add_argument("--seed", type=int, default=ex.DEFAULT_SEED)
    common.add_argument("--draws", type=int, default=200)

    p = _Parser(prog="relaymesh", description="Gaussian multiple-relay channel rate calculator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("rate", parents=[common], help="rates of one network as JSON")
    sw = sub.add_parser("sweep", parents=[common], help="single-relay sweep to CSV")
    sw.add_argument("--workers", type=int, default=1)
    pr = sub.add_parser("probe", parents=[common], help="asymptotic regime verdicts")
    pr.add_argument("--case", action="append", choices=ex.CASE_IDS, help="case id (repeatable; default all)")
    pr.add_argument("--probes", type=int, default=6, help="points per probe path")
    sub.add_parser("verify", parents=[common], help="randomized invariant suites")
    th = sub.add_parser("threshold", parents=[common], help="relay power for a CF fraction of the cut-set bound")
    th.add_argument("--d23", type=float, required=True, help="relay-destination distance")
    th.add_argument("--target", type=float, default=0.97, help="fraction of the cut-set bound")
    return p


def _load_config(path: Optional[Path], required: bool = True) -> dict:
    if path is None:
        if required:
            raise ValidationError("--config is required for this command")
        return {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ValidationError(f"{path}: top level must be a JSON object")
    return cfg


def _parse_strategies(text: Optional[str], default: Sequence[str]) -> list[str]:
    if not text:
        return list(default)
    canon = {s.lower(): s for s in ex.STRATEGIES}
    names = [canon.get(s.strip().lower(), s.strip()) for s in text.split(",") if s.strip()]
    unknown = [s for s in names if s not in ex.STRATEGIES]
    if unknown:
        raise ValidationError(f"unknown strategies {unknown}; choose from {[s.lower() for s in ex.STRATEGIES]}")
    return names


def _emit(text: str, out: Optional[Path]):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _units(args) -> dict:
    return {"rate": "bits" if args.log_base == "2" else "nats", "power": "dB" if args.db else "linear"}


def _network_echo(net, db: bool) -> dict:
    cfg = net.to_config()
    if db:
        to_db = lambda xs: [10.0 * math.log10(x) for x in xs]  # noqa: E731
        cfg["powers"] = to_db(cfg["powers"])
        cfg["noises"] = to_db(cfg["noises"])
        if "gains" in cfg:
            cfg["gains"] = [[10.0 * math.log10(g) if g > 0 else None for g in row] for row in cfg["gains"]]
    return cfg


def cmd_rate(args) -> int:
    net = network_from_config(_load_config(args.config), db=args.db)
    default = ("CS", "DF", "CF", "MH") if net.T == 3 else ("CF_T2", "Cinf")
    results = []
    for s in _parse_strategies(args.strategies, default):
        if s == "CF_T2":
            res = sr.optimize_cf_q(net, args.mode, args.relay_cap).to_dict()
        elif s == "Cinf":
            res = {"strategy": "Cinf", "rate": broadcast_cut_capacity(net)}
        else:
            res = STRATEGY_FUNCS[s](net).to_dict()
        results.append(res)
    doc = {"units": _units(args), "mode": args.mode, "network": _network_echo(net, args.db), "results": results}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def _template(cfg: dict) -> ex.SingleRelayTemplate:
    kw = {k: float(cfg[k]) for k in ("P1", "P2", "N2", "N3", "d13") if k in cfg}
    if "gains" in cfg:
        kw["gains"] = tuple(float(g) for g in cfg["gains"])
    if "path_loss" in cfg:
        kw["path_loss"] = PathLossModel.from_dict(cfg["path_loss"])
    return ex.SingleRelayTemplate(**kw)


def sweep_from_config(cfg: dict, strategies=None, mode=sr.FORALL) -> ex.SweepSpec:
    """SweepSpec from the ``sweep`` object of a config.

    ``grid`` is either an explicit list or ``{"start", "stop", "num", "kind"}``;
    the template fields (P1, P2, N2, N3, d13, path_loss or gains) may sit in
    a ``template`` object or at the top level of ``sweep``.
    """
    sw = cfg.get("sweep")
    if not isinstance(sw, dict):
        raise ValidationError("config: missing 'sweep' object")
    for key in ("variable", "grid"):
        if key not in sw:
            raise ValidationError(f"config field 'sweep.{key}' is missing")
    grid = sw["grid"]
    if isinstance(grid, dict):
        try:
            grid = ex.make_grid(grid["start"], grid["stop"], int(grid["num"]), grid.get("kind", "linear"))
        except KeyError as exc:
            raise ValidationError(f"config field 'sweep.grid' lacks {exc.args[0]!r}") from None
    tmpl = dict(sw.get("template", {}))
    for k in ("P1", "P2", "N2", "N3", "d13", "gains", "path_loss"):
        if k in sw:
            tmpl[k] = sw[k]
    if "path_loss" not in tmpl and "gains" not in tmpl and "path_loss" in cfg:
        tmpl["path_loss"] = cfg["path_loss"]
    try:
        template = _template(tmpl)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"config field 'sweep.template': {exc}") from None
    return ex.SweepSpec(
        variable=sw["variable"],
        grid=tuple(grid),
        template=template,
        d12=sw.get("d12"),
        d23=sw.get("d23"),
        strategies=tuple(strategies or sw.get("strategies", ("CS", "DF", "CF", "MH"))),
        mode=sw.get("mode", mode),
    )


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    strategies = _parse_strategies(args.strategies, ()) or None
    spec = sweep_from_config(cfg, strategies, args.mode)
    rows = ex.run_sweep(spec, workers=args.workers)
    _emit(ex.sweep_csv(spec, rows), args.out)
    return EXIT_OK


def cmd_probe(args) -> int:
    cfg = _load_config(args.config, required=False)
    pl = cfg.get("path_loss", {})
    kappa, eta = float(pl.get("kappa", 1.0)), float(pl.get("eta", 2.0))
    strategies = _parse_strategies(args.strategies, ("DF", "CF"))
    out = []
    for case in args.case or ex.CASE_IDS:
        for v in ex.asymptotic_probe(case, kappa, eta, strategies=strategies, n_probes=args.probes):
            d = v.to_dict()
            d["expected"] = ex.EXPECTED.get((case, v.strategy, v.direction))
            out.append(d)
    doc = {"units": _units(args), "kappa": kappa, "eta": eta, "verdicts": out}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.draws < 1:
        raise ValidationError("--draws must be at least 1")
    suites = ex.verify_invariants(args.draws, args.seed)
    lines = [f"# rng={ex.RNG_NAME} seed={args.seed} draws={args.draws}"]
    for s in suites:
        lines.append(f"{s.name}: {'PASS' if s.passed else 'FAIL'} "
                     f"{s.checked - s.failed}/{s.checked} worst_violation={s.worst:.3g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if all(s.passed for s in suites) else EXIT_VERIFY


def cmd_threshold(args) -> int:
    cfg = _load_config(args.config, required=False)
    template = _template(cfg.get("template", cfg)) if cfg else ex.SingleRelayTemplate()
    doc = {"units": _units(args), "d23": args.d23, "target": args.target, "template": template.describe()}
    try:
        doc["P2"] = ex.power_threshold(template, args.d23, args.target)
        doc["P2_over_P1"] = doc["P2"] / template.P1
    except SearchBoundError as exc:
        doc["P2"] = None
        doc["achieved_fraction"] = exc.achieved
        doc["error"] = str(exc)
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        return EXIT_NONCONVERGED
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"rate": cmd_rate, "sweep": cmd_sweep, "probe": cmd_probe, "verify": cmd_verify,
            "threshold": cmd_threshold}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and execute one subcommand; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except _UsageExit as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        try:
            with use_log_base(args.log_base):
                code = COMMANDS[args.command](args)
        except (RelayMeshError, TypeError, ValueError) as exc:
            print(f"relaymesh {args.command}: {exc}", file=sys.stderr)
            return EXIT_INVALID
    nonconv = [w for w in caught if issubclass(w.category, ConvergenceWarning)]
    for w in nonconv:
        print(f"warning: {w.message}", file=sys.stderr)
    if code == EXIT_OK and nonconv:
        return EXIT_NONCONVERGED
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
