"""Command-line front end: ``bifluid-lab {run,audit,bifluid-table,study}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import config_io
from .bifluid import audit_bifluid, bifluid_table
from .constitutive.audit import audit_hypotheses
from .diagnostics import RefinementStudy
from .errors import BifluidError, BlowUpError, ConfigError
from .solver.run import run

log = logging.getLogger("bifluid_lab")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BLOWUP = 2
EXIT_AUDIT_FAIL = 3


def _out_dir(args, doc, command):
    out = args.out or doc.get("output") or f"bifluid_{command.replace('-', '_')}"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_run(args):
    doc = config_io.validate(config_io.load_document(args.config), "run")
    config, state = config_io.build_run(doc)
    out = _out_dir(args, doc, "run")
    log.info("run: %d steps of dt=%g on %s grid", config.steps, config.dt, config.grid.shape)
    summary = {"config": config.to_dict(), "status": "completed"}
    try:
        result = run(config, state, out_dir=out)
    except BlowUpError as exc:
        summary.update(status="blow-up", blowup_time=exc.time, message=str(exc))
        _write_json(out / "run.json", summary)
        print(f"blow-up at t={exc.time:.6g}: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    last = result.ledger[-1]
    summary.update(final_time=last.time, final_residual=last.residual,
                   max_mass_drift=result.max_relative_mass_drift(),
                   max_band_defect=result.max_band_defect,
                   min_inf_rho=min(m.inf_rho for m in result.monitors))
    _write_json(out / "run.json", summary)
    log.info("run finished: residual %.3e, mass drift %.1e", last.residual,
             summary["max_mass_drift"])
    return EXIT_OK


def cmd_audit(args):
    doc = config_io.validate(config_io.load_document(args.config), "audit")
    region = config_io.build_region(doc.get("region"))
    sampling = config_io.build_sampling(doc.get("sampling"))
    if "bifluid" in doc["law"]:
        report = audit_bifluid(config_io.build_bifluid(doc["law"]["bifluid"], region), sampling)
    else:
        report = audit_hypotheses(config_io.build_law(doc["law"], region), sampling)
    out = _out_dir(args, doc, "audit")
    (out / "report.json").write_text(report.to_json() + "\n")
    if not args.quiet:
        for line in report.summary_lines():
            print(line)
    return EXIT_AUDIT_FAIL if report.verdict == "fail" else EXIT_OK


def _axis(spec):
    if spec.get("spacing", "linear") == "log":
        if spec["min"] <= 0:
            raise ConfigError("log spacing needs a positive minimum")
        return np.geomspace(spec["min"], spec["max"], spec["n"])
    return np.linspace(spec["min"], spec["max"], spec["n"])


def cmd_table(args):
    doc = config_io.validate(config_io.load_document(args.config), "bifluid-table")
    region = config_io.build_region(doc.get("region"))
    system = config_io.build_bifluid(doc["bifluid"], region)
    rows = bifluid_table(system, _axis(doc["rho"]), _axis(doc["Z"]))
    out = _out_dir(args, doc, "bifluid-table")
    with open(out / "table.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rho", "Z", "rho_plus", "a", "P"])
        w.writerows([[repr(float(x)) for x in row] for row in rows])
    return EXIT_OK


def cmd_study(args):
    doc = config_io.validate(config_io.load_document(args.config), "study")
    study = RefinementStudy(
        base=doc["base"], axis=doc["axis"], values=doc["values"], theta=doc.get("theta"),
        flux_k=doc.get("flux_k"), p=doc.get("p", 1),
        slopes_for=doc.get("slopes_for", ["max_abs_residual"]), reuse=doc.get("reuse"),
        save_checkpoints=doc.get("save_checkpoints", True))
    out = _out_dir(args, doc, "study")
    result = study.execute(out, jobs=args.jobs)
    path = result.write(out)
    log.info("study written to %s", path)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "audit": cmd_audit, "bifluid-table": cmd_table, "study": cmd_study}


def build_parser():
    parser = argparse.ArgumentParser(prog="bifluid-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--jobs", type=int, default=1, help="parallel ladder runs")
        p.add_argument("--quiet", action="store_true", help="only report errors")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.quiet:
        warnings.simplefilter("ignore")
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except BlowUpError as exc:
        print(f"blow-up at t={exc.time}: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (BifluidError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
