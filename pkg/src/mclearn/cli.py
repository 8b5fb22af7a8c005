"""Command-line front end: ``mclearn {dims,gap,online,bandit,rerun}``.

Every command prints one JSON report (schema ``report_v1``) that embeds the
fully resolved configuration, so ``mclearn rerun report.json`` reproduces it
byte for byte. Exit codes: 0 ok, 1 usage or argument error, 2 budget
exceeded, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import bandit, dimensions, learners, online, pac_sim
from .errors import BudgetError, InvariantError, ProtocolError
from .hypothesis import (FormatError, HypothesisClass, build_cantor_class, build_constant_class,
                         build_full_class, cantor_hypothesis, load_hclass)

SCHEMA = "report_v1"
GENERATORS = ("full", "cantor", "constants")


class UsageError(Exception):
    pass


# -- config ----------------------------------------------------------------------------

def _class_config(args) -> dict:
    if args.file is not None:
        if args.generator is not None:
            raise UsageError("give either --file or --generator, not both")
        path = Path(args.file)
        if not path.is_file():
            raise UsageError(f"class file not found: {path}")
        return {"file": str(path)}
    gen = args.generator or "cantor"
    if gen == "full":
        need = {"d": args.d, "k": args.k}
    elif gen == "cantor":
        need = {"d": args.d}
    else:
        need = {"k": args.k, "d": args.d if args.d is not None else 1}
    missing = [f"--{n}" for n, v in need.items() if v is None]
    if missing:
        raise UsageError(f"generator {gen!r} needs {' '.join(missing)}")
    return {"generator": gen, **need}


def load_class(cfg: dict) -> HypothesisClass:
    if "file" in cfg:
        return load_hclass(cfg["file"])
    gen = cfg["generator"]
    if gen == "full":
        return build_full_class(cfg["d"], cfg["k"])
    if gen == "cantor":
        return build_cantor_class(cfg["d"])
    return build_constant_class(cfg["k"], cfg["d"])


def _check_output(path) -> None:
    if path is not None and not Path(path).resolve().parent.is_dir():
        raise UsageError(f"output directory does not exist: {Path(path).parent}")


def resolve_config(args) -> dict:
    """Validate arguments and paths before any computation."""
    cmd = args.command
    _check_output(args.output)
    cfg = {"command": cmd, "seed": args.seed, "format": args.format}
    if cmd != "gap":
        cfg["class"] = _class_config(args)
    if cmd == "dims":
        cfg["trees"] = not args.skip_trees
    elif cmd == "gap":
        if args.class_given:
            raise UsageError("gap always runs on the Cantor class; use --d only")
        eps = 0.2 if args.epsilon is None else args.epsilon
        delta = 0.1 if args.delta is None else args.delta
        if not 0 < delta < 1:
            raise UsageError(f"--delta must lie in (0, 1), got {delta}")
        if not 0 < eps < 0.5:
            raise UsageError(f"--epsilon must lie in (0, 0.5), got {eps}")
        if args.trials < 100:
            raise UsageError("--trials must be >= 100")
        d = 8 if args.d is None else args.d
        if d < 2:
            raise UsageError("--d must be >= 2")
        cfg.update(epsilon=eps, delta=delta, trials=args.trials, m_max=args.m_max,
                   workers=args.workers)
        cfg["class"] = {"generator": "cantor", "d": d}
    elif cmd in ("online", "bandit"):
        table = online.LEARNERS if cmd == "online" else bandit.BANDIT_LEARNERS
        learner = args.learner or ("soa" if cmd == "online" else "bsoa")
        if learner not in table:
            raise UsageError(f"unknown learner {learner!r}; choose from {sorted(table)}")
        if (args.adversary is None) == (args.replay is None):
            raise UsageError("give exactly one of --adversary tree or --replay FILE")
        if args.adversary is not None and args.adversary != "tree":
            raise UsageError("the only adversary is 'tree'")
        if args.replay is not None and not Path(args.replay).is_file():
            raise UsageError(f"replay file not found: {args.replay}")
        cfg.update(learner=learner, adversary=args.adversary, replay=args.replay)
        if cmd == "bandit":
            cfg["filter_correct"] = not args.no_filter
    if args.format == "csv" and cmd not in ("online", "bandit"):
        raise UsageError("csv output is only available for transcripts (online, bandit)")
    return cfg


# -- commands --------------------------------------------------------------------------

def cmd_dims(cfg: dict) -> dict:
    H = load_class(cfg["class"])
    dN, wN = dimensions.natarajan_dim(H)
    dG, wG = dimensions.graph_dim(H)
    result = {
        "d": H.d, "k": H.k, "size": len(H),
        "natarajan": {"value": dN, "witness": wN.to_json()},
        "graph": {"value": dG, "witness": wG.to_json()},
    }
    if H.k == 2:
        result["vc"] = {"value": dimensions.vc_dim(H)}
    factor = dimensions.graph_natarajan_factor(H.k)
    result["graph_natarajan_check"] = {"factor": factor, "ok": dN <= dG <= max(factor, 1) * dN or dG == dN == 0}
    if cfg["trees"]:
        dims = dimensions.SubclassDims(H)
        ld, lt = dimensions.littlestone_dim(H, dims)
        bl, bt = dimensions.bandit_littlestone_dim(H, dims)
        result["littlestone"] = {"value": ld, "tree": lt.to_json()}
        result["bandit_littlestone"] = {"value": bl, "tree": bt.to_json()}
    return result


def _rate_json(r: pac_sim.RateEstimate | None):
    if r is None:
        return None
    return {"m": r.m, "failures": r.failures, "trials": r.trials, "rate": r.rate,
            "wilson95": [r.lower, r.upper]}


def _estimate_json(e: pac_sim.SampleComplexityEstimate) -> dict:
    return {"m_hat": e.m_hat, "exceeded": e.exceeded, "failure_rate_at_m": _rate_json(e.failure_rate_at_m),
            "tested": [_rate_json(r) for r in e.tested]}


def cmd_gap(cfg: dict) -> dict:
    d, eps, delta = cfg["class"]["d"], cfg["epsilon"], cfg["delta"]
    H = build_cantor_class(d)
    f0 = cantor_hypothesis(d, ())
    D = pac_sim.badlb_distribution(d, eps, f0, H.k, strict=False)
    witness = dimensions.GShatterWitness(tuple(range(d)), tuple(int(v) for v in f0))
    policies = {"good": learners.ErmPolicy("good_observed_labels"),
                "bad": learners.ErmPolicy("bad", witness=witness)}
    out = {}
    for name, policy in policies.items():
        est = pac_sim.estimate_sample_complexity(policy, H, D, eps, delta, cfg["trials"], cfg["seed"],
                                                 m_max=cfg["m_max"], workers=cfg["workers"])
        out[name] = _estimate_json(est)
    m_ref = math.ceil(math.log(1 / delta) / eps)
    at_ref = pac_sim.failure_rate(policies["bad"], H, D, m_ref, eps, cfg["trials"], cfg["seed"],
                                    cfg["workers"])
    out["bad_at_m_ref"] = _rate_json(at_ref)
    out["bad_exact_failure_at_m_ref"] = pac_sim.exact_unsampled_failure(D.instance_marginal, eps, m_ref)
    out["m_ref"] = m_ref
    g, b = out["good"]["m_hat"], out["bad"]["m_hat"]
    out["ratio"] = None if g is None or b is None else b / g
    out["good_bound_ok"] = g is not None and g <= m_ref
    out["bad_fails_at_m_ref"] = at_ref.lower > delta
    return out


def _transcript_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["t"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def load_replay(path) -> list[tuple[int, int]]:
    """(instance, hidden label) pairs from a JSONL sequence or from an online/bandit report."""
    text = Path(path).read_text()
    try:
        report = json.loads(text)
    except ValueError:
        report = None
    if isinstance(report, dict) and report.get("schema") == SCHEMA:
        return [(int(r["x"]), int(r["label"])) for r in report["result"]["replay"]]
    return online.read_sequence(path)


def cmd_online(cfg: dict) -> dict:
    H = load_class(cfg["class"])
    dims = dimensions.SubclassDims(H)
    ld, tree = dimensions.littlestone_dim(H, dims)
    learner = online.LEARNERS[cfg["learner"]](H, dims)
    if cfg["adversary"] == "tree":
        res = online.realizable_adversary(H, learner, tree)
        transcript = res.transcript
        extra = {"forced_hypothesis": H.table[res.hypothesis].tolist()}
    else:
        transcript = online.run_online(H, learner, load_replay(cfg["replay"]))
        extra = {}
    bound_ok = transcript.mistakes <= ld if cfg["learner"] == "soa" else None
    replay = [{"x": x, "label": y} for x, y in transcript.sequence]
    return {"littlestone_dim": ld, "mistakes": transcript.mistakes, "bound_ok": bound_ok,
            "rounds": transcript.to_json()["rounds"], "replay": replay, **extra}


def cmd_bandit(cfg: dict) -> dict:
    H = load_class(cfg["class"])
    dims = dimensions.SubclassDims(H)
    bl, tree = dimensions.bandit_littlestone_dim(H, dims)
    learner = bandit.BANDIT_LEARNERS[cfg["learner"]](H, dims, filter_correct=cfg["filter_correct"])
    if cfg["adversary"] == "tree":
        res = bandit.bandit_adversary(H, learner, tree)
        transcript = res.transcript
        hidden = H.table[res.hypothesis]
        extra = {"forced_hypothesis": hidden.tolist()}
        pairs = [(r.x, int(hidden[r.x])) for r in transcript.rounds]
    else:
        pairs = load_replay(cfg["replay"])
        transcript = bandit.run_bandit(H, learner, bandit.HiddenLabelingOracle(
            [x for x, _ in pairs], [y for _, y in pairs]))
        extra = {}
    bound_ok = transcript.mistakes <= bl if cfg["learner"] == "bsoa" else None
    replay = [{"x": x, "label": y} for x, y in pairs]
    return {"bandit_littlestone_dim": bl, "mistakes": transcript.mistakes, "bound_ok": bound_ok,
            "rounds": transcript.to_json()["rounds"], "replay": replay, **extra}


COMMANDS = {"dims": cmd_dims, "gap": cmd_gap, "online": cmd_online, "bandit": cmd_bandit}


def render(cfg: dict, result: dict) -> str:
    if cfg["format"] == "csv":
        return _transcript_csv(result["rounds"])
    report = {"schema": SCHEMA, "config": cfg, "result": result}
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def run_config(cfg: dict) -> str:
    return render(cfg, COMMANDS[cfg["command"]](cfg))


# -- argument parsing --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mclearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--generator", choices=GENERATORS, help="built-in class family")
        p.add_argument("--d", type=int, help="number of instances")
        p.add_argument("--k", type=int, help="number of labels")
        p.add_argument("--file", help="HCLASS v1 file instead of a generator")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--workers", type=int, default=1, help="processes for Monte-Carlo trials")

    p = sub.add_parser("dims", help="all four dimensions with witnesses")
    common(p)
    p.add_argument("--skip-trees", action="store_true", help="skip L-Dim and BL-Dim")

    p = sub.add_parser("gap", help="good vs bad ERM sample complexity on the Cantor class")
    common(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--m-max", type=int, default=4096)

    for name in ("online", "bandit"):
        p = sub.add_parser(name, help=f"{name} learner against the tree adversary or a replay file")
        common(p)
        p.add_argument("--learner")
        p.add_argument("--adversary", help="'tree'")
        p.add_argument("--replay", help="JSONL (x, label) sequence, or an earlier report of the same command")
        if name == "bandit":
            p.add_argument("--no-filter", action="store_true",
                           help="BSOA ignores the label revealed by a correct guess")

    p = sub.add_parser("rerun", help="re-run the configuration embedded in a report")
    p.add_argument("report")
    p.add_argument("--output")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "rerun":
            _check_output(args.output)
            try:
                report = json.loads(Path(args.report).read_text())
                cfg = report["config"]
            except (OSError, ValueError, KeyError) as exc:
                raise UsageError(f"cannot read report {args.report}: {exc}") from None
            if report.get("schema") != SCHEMA or cfg.get("command") not in COMMANDS:
                raise UsageError(f"{args.report} is not a {SCHEMA} report")
            output = args.output
        else:
            args.class_given = args.file is not None or args.generator is not None
            cfg = resolve_config(args)
            output = args.output
        text = run_config(cfg)
    except (UsageError, FormatError, ValueError, ProtocolError) as exc:
        print(f"mclearn: error: {exc}", file=sys.stderr)
        return 1
    except BudgetError as exc:
        print(f"mclearn: budget exceeded: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"mclearn: invariant violated: {exc}", file=sys.stderr)
        return 3
    if output is None:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            pass
    else:
        Path(output).write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
