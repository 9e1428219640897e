"""Command line front end: build, evaluate, transform, analyze, sweep.

Programs travel as JSON documents (see the program module), truth tables as
two-line text files (variable count, then 2^n characters of {0,1} in
input-value order).  Analysis commands emit CSV with a fixed header row to
stdout or --out; a reproducibility record (command, seeds, program digest,
wall time) goes to stderr as a JSON line.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from dataclasses import dataclass, field

import click
import numpy as np

from . import analysis, constructions, program, realify


class ParseFailure(click.ClickException):
    exit_code = 2


@dataclass
class ExperimentRecord:
    command: str
    seed: int | None = None
    program_digest: str | None = None
    wall_time_s: float = 0.0
    metrics: dict = field(default_factory=dict)

    def emit(self) -> None:
        payload = {
            "command": self.command,
            "seed": self.seed,
            "program": self.program_digest,
            "wall_time_s": round(self.wall_time_s, 6),
            "metrics": self.metrics,
        }
        click.echo(json.dumps(payload, sort_keys=True), err=True)


# -- file formats ------------------------------------------------------------

def load_truth_table(path) -> program.TruthTable:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseFailure(f"{path}: line 1: expected the number of variables")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ParseFailure(f"{path}: line 1: expected an integer, got {lines[0]!r}")
    if n < 1:
        raise ParseFailure(f"{path}: line 1: number of variables must be >= 1")
    if len(lines) < 2:
        raise ParseFailure(f"{path}: line 2: expected {1 << n} bits")
    bits = lines[1].strip()
    if len(bits) != 1 << n:
        raise ParseFailure(f"{path}: line 2: expected {1 << n} bits, got {len(bits)}")
    for col, c in enumerate(bits, start=1):
        if c not in "01":
            raise ParseFailure(f"{path}: line 2 column {col}: expected 0 or 1, got {c!r}")
    return program.TruthTable(n, np.array([c == "1" for c in bits]))


def save_truth_table(f: program.TruthTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{f.n_vars}\n")
        fh.write("".join("1" if b else "0" for b in f.bits))
        fh.write("\n")


def _load_program(path) -> program.QbProgram:
    try:
        return program.load_program(path)
    except program.ProgramFormatError as e:
        raise ParseFailure(f"{path}: {e}") from e
    except OSError as e:
        raise ParseFailure(str(e)) from e


def _load_permutation_bp(path) -> constructions.PermutationBp:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseFailure(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    try:
        levels = tuple(
            (lvl["var"], tuple(lvl["perm0"]), tuple(lvl["perm1"]))
            for lvl in obj["levels"]
        )
        return constructions.PermutationBp(
            width=obj["width"],
            levels=levels,
            start=obj["start"],
            accepting=frozenset(obj["accepting"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseFailure(f"{path}: invalid permutation program: {e}") from e


def _parse_criterion(text: str) -> program.Margin | program.OneSided:
    parts = text.split(":")
    try:
        if parts[0] == "margin" and len(parts) == 2:
            return program.Margin(float(parts[1]))
        if parts[0] == "one-sided" and len(parts) <= 3:
            reject_min = float(parts[1]) if len(parts) >= 2 else 0.125
            tol = float(parts[2]) if len(parts) == 3 else 1e-9
            return program.OneSided(reject_min=reject_min, tol=tol)
    except ValueError as e:
        raise ParseFailure(f"invalid criterion {text!r}: {e}") from e
    raise ParseFailure(
        f"invalid criterion {text!r}; use margin:EPS or one-sided[:REJECT_MIN[:TOL]]"
    )


def _open_out(out_path):
    if out_path is None:
        return sys.stdout, False
    return open(out_path, "w", encoding="utf-8", newline=""), True


def _write_csv(out_path, header: list[str], rows: list[list]) -> None:
    fh, needs_close = _open_out(out_path)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if needs_close:
            fh.close()


def _program_summary(p: program.QbProgram) -> str:
    return (
        f"width={p.width} length={p.length} n_vars={p.n_vars} "
        f"read_once={program.is_read_once(p)} stable={program.is_stable(p)} "
        f"digest={program.program_digest(p)}"
    )


# -- commands ------------------------------------------------------------------

@click.group()
def main():
    """Quantum branching program toolkit."""


@main.group()
def build():
    """Construct a program and write it to a file."""


@build.command("mod")
@click.option("--p", "modulus", type=int, required=True, help="Prime modulus.")
@click.option("--n", "n_vars", type=int, required=True, help="Number of input variables.")
@click.option(
    "--strategy",
    type=click.Choice(["greedy", "sampled"]),
    default="greedy",
    show_default=True,
)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for sampled strategy.")
@click.option("--out", "-o", type=click.Path(dir_okay=False), required=True)
def build_mod(modulus, n_vars, strategy, seed, out):
    """Divisibility-of-ones program from a certified good multiplier set."""
    t0 = time.perf_counter()
    try:
        prog = constructions.build_mod_program(modulus, n_vars, strategy=strategy, seed=seed)
    except ValueError as e:
        raise ParseFailure(str(e)) from e
    program.save_program(prog, out)
    click.echo(_program_summary(prog))
    ExperimentRecord(
        command="build mod",
        seed=seed if strategy == "sampled" else None,
        program_digest=program.program_digest(prog),
        wall_time_s=time.perf_counter() - t0,
        metrics={"p": modulus, "n": n_vars, "strategy": strategy, "width": prog.width},
    ).emit()


@build.command("universal")
@click.option("--truth-table", "table_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "-o", type=click.Path(dir_okay=False), required=True)
def build_universal(table_path, out):
    """Exact program of width 2^n for an arbitrary truth table."""
    t0 = time.perf_counter()
    f = load_truth_table(table_path)
    try:
        prog = constructions.universal_exact_qbp(f)
    except ValueError as e:
        raise ParseFailure(str(e)) from e
    program.save_program(prog, out)
    click.echo(_program_summary(prog))
    ExperimentRecord(
        command="build universal",
        program_digest=program.program_digest(prog),
        wall_time_s=time.perf_counter() - t0,
        metrics={"n": f.n_vars, "width": prog.width},
    ).emit()


@build.command("perm")
@click.option("--bp", "bp_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="JSON file with width, start, accepting, levels[{var,perm0,perm1}].")
@click.option("--n", "n_vars", type=int, default=None, help="Total variable count (default: max var read).")
@click.option("--out", "-o", type=click.Path(dir_okay=False), required=True)
def build_perm(bp_path, n_vars, out):
    """Embed a classical permutation branching program."""
    t0 = time.perf_counter()
    bp = _load_permutation_bp(bp_path)
    try:
        prog = constructions.permutation_bp_to_qbp(bp, n_vars=n_vars)
    except ValueError as e:
        raise ParseFailure(str(e)) from e
    program.save_program(prog, out)
    click.echo(_program_summary(prog))
    ExperimentRecord(
        command="build perm",
        program_digest=program.program_digest(prog),
        wall_time_s=time.perf_counter() - t0,
        metrics={"width": prog.width},
    ).emit()


@main.command("eval")
@click.argument("program_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_bits", type=str, default=None, help="Input bit string.")
@click.option("--exhaustive", is_flag=True, help="Check against a truth table over all inputs.")
@click.option("--truth-table", "table_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--criterion", type=str, default="margin:0.5", show_default=True,
              help="margin:EPS or one-sided[:REJECT_MIN[:TOL]].")
@click.option("--max-listed", type=int, default=8, show_default=True,
              help="How many counterexamples to print.")
@click.pass_context
def eval_cmd(ctx, program_path, input_bits, exhaustive, table_path, criterion, max_listed):
    """Acceptance probability on one input, or an exhaustive check."""
    t0 = time.perf_counter()
    prog = _load_program(program_path)
    if exhaustive:
        if table_path is None:
            raise ParseFailure("--exhaustive requires --truth-table")
        f = load_truth_table(table_path)
        crit = _parse_criterion(criterion)
        try:
            report = program.computes(prog, f, crit)
        except ValueError as e:
            raise ParseFailure(str(e)) from e
        click.echo(f"holds={report.holds}")
        click.echo(f"checked={report.checked}")
        click.echo(f"min_margin={report.min_margin:.17g}")
        click.echo(f"counterexamples={len(report.counterexamples)}")
        for bits in report.counterexamples[:max_listed]:
            click.echo("  " + "".join(map(str, bits)))
        ExperimentRecord(
            command="eval",
            program_digest=program.program_digest(prog),
            wall_time_s=time.perf_counter() - t0,
            metrics={
                "holds": report.holds,
                "min_margin": report.min_margin,
                "counterexamples": len(report.counterexamples),
            },
        ).emit()
        if not report.holds:
            ctx.exit(1)
        return
    if input_bits is None:
        raise ParseFailure("provide --input BITS or --exhaustive --truth-table FILE")
    try:
        prob = program.evaluate(prog, input_bits)
    except ValueError as e:
        raise ParseFailure(str(e)) from e
    click.echo(f"{prob:.17g}")
    ExperimentRecord(
        command="eval",
        program_digest=program.program_digest(prog),
        wall_time_s=time.perf_counter() - t0,
        metrics={"probability": prob},
    ).emit()


@main.command("realify")
@click.argument("program_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", type=click.Path(dir_okay=False), required=True)
def realify_cmd(program_path, out):
    """Rewrite a program with real amplitudes at twice the width."""
    t0 = time.perf_counter()
    prog = _load_program(program_path)
    real = realify.realify_program(prog)
    program.save_program(real, out)
    click.echo(_program_summary(real))
    ExperimentRecord(
        command="realify",
        program_digest=program.program_digest(real),
        wall_time_s=time.perf_counter() - t0,
        metrics={"source_width": prog.width, "width": real.width},
    ).emit()


@main.command("analyze")
@click.argument("program_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--truth-table", "table_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--epsilon", type=float, required=True, help="Margin of computation.")
@click.option("--theta", type=float, default=None, help="Component chain radius.")
@click.option("--auto-theta", is_flag=True, help="Use the measured accept/reject separation.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV destination (default stdout).")
@click.pass_context
def analyze_cmd(ctx, program_path, table_path, epsilon, theta, auto_theta, out):
    """Per-level component analysis and the derived deterministic OBDD."""
    t0 = time.perf_counter()
    prog = _load_program(program_path)
    f = load_truth_table(table_path)
    if (theta is None) == (not auto_theta):
        raise ParseFailure("provide exactly one of --theta or --auto-theta")
    try:
        if auto_theta:
            theta = analysis.measured_separation(prog, f, epsilon)
        obdd = analysis.derive_deterministic_obdd(prog, f, theta, epsilon)
        levels = analysis.reachable_configurations(prog)
    except ValueError as e:
        raise ParseFailure(str(e)) from e
    bound = analysis.packing_width_bound(theta, prog.width)
    rows = [
        [lv.level, len(lv.configs), f"{theta:.17g}", obdd.level_counts[lv.level], f"{bound:.17g}"]
        for lv in levels
    ]
    _write_csv(out, ["level", "reachable_count", "theta", "component_count", "bound_value"], rows)
    probs = program.evaluate_all(prog)
    agree = bool(np.array_equal(obdd.classify_all(), probs >= 0.5 + epsilon - 1e-12))
    click.echo(f"verified={str(agree).lower()} max_width={obdd.max_width}", err=True)
    ExperimentRecord(
        command="analyze",
        program_digest=program.program_digest(prog),
        wall_time_s=time.perf_counter() - t0,
        metrics={
            "theta": theta,
            "epsilon": epsilon,
            "max_width": obdd.max_width,
            "bound": bound,
            "verified": agree,
        },
    ).emit()
    if not agree:
        ctx.exit(1)


@main.command("widths")
@click.option("--truth-table", "table_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--order", type=str, default=None, help="Comma-separated variable order, e.g. 2,1,3.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def widths_cmd(table_path, order, out):
    """Minimal deterministic OBDD width per level (subfunction counting)."""
    t0 = time.perf_counter()
    f = load_truth_table(table_path)
    parsed_order = None
    if order is not None:
        try:
            parsed_order = tuple(int(x) for x in order.split(","))
        except ValueError as e:
            raise ParseFailure(f"invalid order {order!r}: {e}") from e
    try:
        widths = analysis.min_obdd_width(f, parsed_order)
    except ValueError as e:
        raise ParseFailure(str(e)) from e
    _write_csv(out, ["level", "width"], [[j, w] for j, w in enumerate(widths.level_widths)])
    click.echo(f"max_width={widths.max_width}", err=True)
    ExperimentRecord(
        command="widths",
        wall_time_s=time.perf_counter() - t0,
        metrics={"n": f.n_vars, "max_width": widths.max_width},
    ).emit()


def _parse_range(text: str, what: str) -> tuple[float, ...]:
    try:
        parts = [float(x) for x in text.split(":")]
    except ValueError as e:
        raise ParseFailure(f"invalid {what} {text!r}: {e}") from e
    if len(parts) == 2:
        parts.append(1.0)
    if len(parts) != 3 or parts[2] <= 0:
        raise ParseFailure(f"invalid {what} {text!r}; use START:STOP[:STEP]")
    start, stop, step = parts
    values = []
    x = start
    while x <= stop + 1e-12:
        values.append(round(x, 12))
        x += step
    return tuple(values)


def _mod_sweep_row(p: int, n: int, seed: int) -> list:
    t_sampled = constructions.target_set_size(p)
    greedy = constructions.greedy_good_set(p)
    sampled_prog = constructions.build_mod_program(p, n, strategy="sampled", seed=seed)
    greedy_prog = constructions.build_mod_program(p, n, strategy="greedy")

    def min_reject(prog: program.QbProgram) -> float:
        worst = 1.0
        for r in range(1, p):
            if r > n:
                continue
            bits = (1,) * r + (0,) * (n - r)
            worst = min(worst, 1.0 - program.evaluate(prog, bits))
        return worst

    rej_sampled = min_reject(sampled_prog)
    rej_greedy = min_reject(greedy_prog)
    table = constructions.mod_truth_table(p, n)
    obdd_width = analysis.min_obdd_width(table).max_width

    max_acc = 0.0
    for r in range(1, p):
        if r > n:
            continue
        bits = (1,) * r + (0,) * (n - r)
        max_acc = max(max_acc, program.evaluate(greedy_prog, bits))
    margin_eps = 0.5 - max_acc if max_acc < 0.5 else None
    theta2 = ""
    d_min_margin = ""
    d_min_general = ""
    if margin_eps is not None:
        rep = analysis.theta_bounds(margin_eps, greedy_prog.width)
        theta2 = f"{rep.theta2:.17g}"
        d_min_general = analysis.lower_bound_width(obdd_width, margin_eps, "general")
        if rep.theta2_radicand > 0:
            d_min_margin = analysis.lower_bound_width(obdd_width, margin_eps, "margin")
    return [
        p, n, t_sampled, greedy.t, sampled_prog.width, greedy_prog.width,
        f"{rej_sampled:.17g}", f"{rej_greedy:.17g}", obdd_width,
        f"{margin_eps:.17g}" if margin_eps is not None else "",
        theta2, d_min_margin, d_min_general, "",
    ]


MOD_SWEEP_HEADER = [
    "p", "n", "t_sampled", "t_greedy", "width_sampled", "width_greedy",
    "min_reject_sampled", "min_reject_greedy", "min_obdd_width",
    "margin_epsilon", "theta2", "d_min_margin", "d_min_general", "error",
]


@main.command("sweep")
@click.option("--p-range", type=str, default=None, help="Prime range START:STOP.")
@click.option("--epsilon-range", type=str, default=None, help="Margin range START:STOP:STEP.")
@click.option("--n", "n_vars", type=int, default=12, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--t", "t_width", type=int, default=1 << 20, show_default=True,
              help="Minimal OBDD width used by the epsilon sweep bounds.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def sweep_cmd(p_range, epsilon_range, n_vars, seed, t_width, out):
    """One CSV row per parameter point; per-row errors recorded, sweep continues."""
    t0 = time.perf_counter()
    if (p_range is None) == (epsilon_range is None):
        raise ParseFailure("provide exactly one of --p-range or --epsilon-range")
    if p_range is not None:
        values = _parse_range(p_range, "p range")
        primes = [int(v) for v in values if float(v).is_integer() and constructions.is_prime(int(v))]
        rows = []
        for p in primes:
            try:
                rows.append(_mod_sweep_row(p, n_vars, seed))
            except Exception as e:  # noqa: BLE001 - per-row errors are data
                rows.append([p, n_vars] + [""] * (len(MOD_SWEEP_HEADER) - 3) + [str(e)])
        _write_csv(out, MOD_SWEEP_HEADER, rows)
        ExperimentRecord(
            command="sweep",
            seed=seed,
            wall_time_s=time.perf_counter() - t0,
            metrics={"points": len(rows), "n": n_vars},
        ).emit()
        return
    header = ["epsilon", "theta2_radicand", "theta2", "d_min_margin", "d_min_general"]
    rows = []
    for eps in _parse_range(epsilon_range, "epsilon range"):
        try:
            rep = analysis.theta_bounds(float(eps), 1)
            d_margin = (
                analysis.lower_bound_width(t_width, float(eps), "margin")
                if rep.theta2_radicand > 0
                else ""
            )
            d_general = analysis.lower_bound_width(t_width, float(eps), "general")
            rows.append([
                f"{eps:.17g}", f"{rep.theta2_radicand:.17g}", f"{rep.theta2:.17g}",
                d_margin, d_general,
            ])
        except Exception as e:  # noqa: BLE001
            rows.append([f"{eps:.17g}", "", "", "", str(e)])
    _write_csv(out, header, rows)
    ExperimentRecord(
        command="sweep",
        wall_time_s=time.perf_counter() - t0,
        metrics={"points": len(rows), "t": t_width},
    ).emit()


if __name__ == "__main__":
    main()
