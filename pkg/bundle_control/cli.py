#!/usr/bin/env python3
"""bundle-control - CLI entry point for solving and generating voter control instances."""

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

from pydantic import ValidationError
from rich.markup import escape
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from rich.syntax import Syntax
from rich.table import Table

from bundle_control import __version__, get_git_commit
from bundle_control.config import (
    CONFIG_DIR,
    LOCAL_CONFIG_NAME,
    TEMPLATE_PATH,
    Settings,
    load_settings,
)
from bundle_control.console import configure_logging, console
from bundle_control.control import CONS_ADD, Mode, Solution, Variant, verify_solution
from bundle_control.election import BundlingGraph, ComponentShape, connected_components
from bundle_control.errors import BundleControlError
from bundle_control.hardness import HardnessSource, generate_hardness_instance
from bundle_control.ilp import build_program, collapse_to_classes
from bundle_control.instance_io import (
    InstanceDocument,
    parse_dimacs,
    parse_edge_list,
    read_instance,
    serialize_instance,
)
from bundle_control.pathdp import max_gap_path
from bundle_control.polysolve import SOLVERS, dispatch
from bundle_control.reductions import (
    RandomInstanceParams,
    SymmetryClass,
    random_instance,
    random_path_instance,
)


def _settings(args: argparse.Namespace) -> Settings:
    """Load settings and let the config file's log level apply unless overridden."""
    settings = load_settings(args.config)
    if not args.verbose and not os.getenv("LOG_LEVEL"):
        configure_logging(settings.log_level)
    return settings


def cmd_solve(args: argparse.Namespace) -> int:
    """Decide an instance and print a minimum solution."""
    settings = _settings(args)
    instance = read_instance(args.instance)

    if args.dump_lp:
        model = collapse_to_classes(instance)
        k = instance.budget.effective_limit(len(model.classes))
        program = build_program(model, instance.variant, instance.preferred, k)
        console.print(program.to_lp(), markup=False, highlight=False, end="")
        return 0

    routed = dispatch(
        instance, args.solver or settings.default_solver, args.cap or settings.oracle_cap
    )
    solution = routed.solution

    if args.json:
        report = {
            "answer": "yes" if solution is not None else "no",
            "solver": routed.solver,
            "profile": routed.profile.describe(),
            "leaders": list(solution.leaders) if solution is not None else None,
            "size": solution.size if solution is not None else None,
            "elapsed_ms": round(routed.elapsed_ms, 3),
        }
        console.print_json(json.dumps(report))
        return 0 if solution is not None else 1

    console.print(f"\n[bold blue]━━━ {instance.variant} ━━━[/bold blue]\n")
    console.print(f"[dim]Bundles:[/dim] {routed.profile.describe()}")
    console.print(f"[dim]Solver:[/dim]  {routed.solver} ({routed.elapsed_ms:.1f} ms)")
    console.print(f"[dim]Budget:[/dim]  {instance.budget}")
    if solution is None:
        console.print("\n[bold red]✗ no[/bold red] - no solution within the budget")
        return 1
    leaders = ", ".join(solution.leaders) or "(none)"
    console.print(f"\n[bold green]✓ yes[/bold green] - minimum size {solution.size}: {leaders}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    """Check a leader set against an instance."""
    instance = read_instance(args.instance)
    verdict = verify_solution(instance, Solution.of(args.leaders))

    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("Candidate")
    table.add_column("Score", justify="right")
    for candidate, score in verdict.scores.items():
        style = "bold" if candidate == instance.preferred else ""
        table.add_row(candidate, str(score), style=style)

    if verdict:
        console.print(f"[bold green]true[/bold green] ({verdict.reason})")
    else:
        console.print(f"[bold red]false[/bold red] ({verdict.reason}) {verdict.detail}")
    if verdict.scores:
        console.print(table)
    return 0 if verdict else 1


def cmd_classify(args: argparse.Namespace) -> int:
    """Print the bundling profile of an instance."""
    instance = read_instance(args.instance)
    profile = instance.profile()
    console.print(profile.describe())

    if profile.symmetric:
        components = connected_components(BundlingGraph.from_bundling(instance.kappa))
        table = Table(show_header=True, header_style="bold cyan")
        table.add_column("Shape")
        table.add_column("Components", justify="right")
        table.add_column("Largest", justify="right")
        for shape in ComponentShape:
            sizes = [len(c.vertices) for c in components if c.shape is shape]
            if sizes:
                table.add_row(shape.value, str(len(sizes)), str(max(sizes)))
        console.print(table)
    return 0


def _read_source(args: argparse.Namespace) -> str:
    if args.input is None:
        raise BundleControlError(f"{args.source} needs --input")
    return Path(args.input).read_text()


def cmd_generate(args: argparse.Namespace) -> int:
    """Write a random or reduction-built instance."""
    target = Variant.from_tag(args.target) if args.target else None
    if args.source == "random":
        variant = target or CONS_ADD
        default_pool = 0 if variant.mode is Mode.DELETE else 6
        params = RandomInstanceParams(
            candidates=args.candidates,
            registered=args.registered,
            pool=default_pool if args.pool is None else args.pool,
            max_bundle_size=args.max_bundle_size,
            symmetry=SymmetryClass(args.symmetry),
            variant=variant,
            budget=args.budget,
            unlimited=args.unlimited,
            seed=args.seed,
        )
        instance = random_instance(params)
    else:
        source = HardnessSource(args.source)
        text = _read_source(args)
        data = parse_dimacs(text) if source is HardnessSource.SAT223 else parse_edge_list(text)
        instance = generate_hardness_instance(source, data, args.h, target)

    document = serialize_instance(instance)
    if args.output:
        args.output.write_text(document, encoding="utf-8")
        console.print(f"[bold green]✓ Wrote[/bold green] {args.output}")
    else:
        sys.stdout.write(document)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    """Time the path DP over a grid of pool sizes and write CSV."""
    bench = _settings(args).bench
    sizes = args.sizes or bench.sizes
    budget = bench.budget if args.budget is None else args.budget
    repeats = args.repeats or bench.repeats

    rows: list[tuple[int, str, float]] = []
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task(f"Benchmarking {args.solver}", total=len(sizes) * repeats)
        for size in sizes:
            for repeat in range(repeats):
                instance = random_path_instance(size, budget, seed=bench.seed + repeat)
                started = time.perf_counter()
                if args.solver == "path-dp":
                    max_gap_path(instance.pool, instance.kappa, "p", budget).best_by_size()
                else:
                    dispatch(instance)
                rows.append((size, args.solver, (time.perf_counter() - started) * 1000))
                progress.advance(task)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["n", "solver", "milliseconds"])
    writer.writerows((n, solver, f"{ms:.3f}") for n, solver, ms in rows)
    if args.output:
        args.output.write_text(buffer.getvalue())
        console.print(f"[bold green]✓ Wrote[/bold green] {args.output}")
    else:
        sys.stdout.write(buffer.getvalue())
    return 0


def cmd_init(args: argparse.Namespace) -> int:
    """Initialize configuration file for bundle-control."""
    if args.local:
        config_dir = Path.cwd()
        config_file = config_dir / LOCAL_CONFIG_NAME
    else:
        config_dir = CONFIG_DIR
        config_file = config_dir / "config.yaml"

    config_dir.mkdir(parents=True, exist_ok=True)

    if config_file.exists() and not args.force:
        console.print(f"\n[bold yellow]⚠ Config file already exists:[/bold yellow] {config_file}")
        console.print("  Use [bold]--force[/bold] to overwrite")
        return 1

    try:
        template_content = TEMPLATE_PATH.read_text()
    except FileNotFoundError:
        console.print(f"[bold red]Error:[/bold red] Template file not found at {TEMPLATE_PATH}")
        console.print("Please reinstall bundle-control to restore the template file.")
        return 1

    config_file.write_text(template_content)

    console.print("\n[bold blue]━━━ bundle-control Init ━━━[/bold blue]\n")
    console.print(f"[bold green]✓ Created config file:[/bold green] {config_file}")
    console.print("\n[bold cyan]Next steps:[/bold cyan]")
    console.print(f"  1. Edit [bold]{config_file}[/bold]")
    console.print("  2. Raise oracle_cap if you verify larger instances by brute force")
    console.print("  3. Run: [bold cyan]bctl solve instance.json[/bold cyan]")
    console.print()
    return 0


def cmd_show_config(args: argparse.Namespace) -> int:
    """Display the configuration template."""
    try:
        template_content = TEMPLATE_PATH.read_text()
    except FileNotFoundError:
        console.print(f"[bold red]Error:[/bold red] Template file not found at {TEMPLATE_PATH}")
        console.print("Please reinstall bundle-control to restore the template file.")
        return 1

    console.print("\n[bold blue]━━━ Config Template ━━━[/bold blue]")
    console.print(f"[dim]Location: {TEMPLATE_PATH}[/dim]\n")
    console.print(template_content, markup=False)
    return 0


def cmd_show_schema(args: argparse.Namespace) -> int:
    """Display the instance document JSON schema."""
    schema = json.dumps(InstanceDocument.model_json_schema(), indent=2)
    console.print("\n[bold blue]━━━ Instance JSON Schema ━━━[/bold blue]\n")
    if args.pretty:
        console.print(Syntax(schema, "json", theme="monokai", line_numbers=False))
    else:
        console.print(schema, markup=False, highlight=False)
    return 0


def cmd_version(args: argparse.Namespace) -> int:
    """Print version information."""
    version_parts = [f"bundle-control {__version__}"]
    commit = get_git_commit()
    if commit:
        version_parts.append(f"[dim]({commit})[/dim]")
    console.print(" ".join(version_parts))
    return 0


def _add_instance_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("instance", type=Path, help="Instance JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bundle-control",
        description="Decide and solve Plurality voter control with bundled voters",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""\
Examples:
  # Solve an instance with the most specific solver that applies
  bctl solve instance.json

  # Cross-check against brute force
  bctl solve instance.json --solver oracle --json

  # Check a leader set
  bctl verify instance.json w1 w4

  # Generate a seeded random symmetric instance
  bctl generate random --symmetry symmetric --max-bundle-size 3 --seed 7 -o random.json

  # Build the dominating set reduction from an edge list
  bctl generate ds-w2 --input graph.txt --h 2 --target des-add -o ds.json

  # Time the path DP
  bctl bench --solver path-dp --output timings.csv

Commands can also be invoked as:
  bundle-control <command>
""",
    )
    parser.add_argument("--version", "-V", action="store_true", help="Show version and exit")
    parser.add_argument("--config", "-c", type=Path, help="Path to config.yaml")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Solve command
    solve_parser = subparsers.add_parser(
        "solve",
        help="Decide an instance and print a minimum solution",
        description="Route the instance to a solver and print yes/no with a minimum leader set",
    )
    _add_instance_argument(solve_parser)
    solve_parser.add_argument(
        "--solver",
        "-s",
        choices=["auto", *SOLVERS],
        help="Solver to use (default: from config, usually auto)",
    )
    solve_parser.add_argument("--json", action="store_true", help="Print a JSON report")
    solve_parser.add_argument("--cap", type=int, help="Oracle cap for this run")
    solve_parser.add_argument(
        "--dump-lp",
        action="store_true",
        help="Print the 0-1 program of an anonymous instance in LP format instead of solving",
    )
    solve_parser.set_defaults(func=cmd_solve)

    # Verify command
    verify_parser = subparsers.add_parser(
        "verify",
        help="Check a leader set",
        description="Apply the leaders' bundles and check the budget and the winner condition",
    )
    _add_instance_argument(verify_parser)
    verify_parser.add_argument("leaders", nargs="*", help="Leader voter ids")
    verify_parser.set_defaults(func=cmd_verify)

    # Classify command
    classify_parser = subparsers.add_parser(
        "classify",
        help="Print the bundling profile",
        description="Report symmetry, disjointness, anonymity, bundle size and component shapes",
    )
    _add_instance_argument(classify_parser)
    classify_parser.set_defaults(func=cmd_classify)

    # Generate command
    generate_parser = subparsers.add_parser(
        "generate",
        help="Write a random or reduction-built instance",
        description="Generate a seeded random instance or apply a hardness construction",
    )
    generate_parser.add_argument(
        "source", choices=["random", *(s.value for s in HardnessSource)], help="What to generate"
    )
    generate_parser.add_argument(
        "--input", "-i", help="Edge list (graph sources) or DIMACS file (sat223)"
    )
    generate_parser.add_argument("--h", type=int, help="Solution size of the source problem")
    generate_parser.add_argument(
        "--target", "-t", help="Variant: cons-add, cons-del, des-add or des-del"
    )
    generate_parser.add_argument("--output", "-o", type=Path, help="Output file (default: stdout)")
    generate_parser.add_argument("--candidates", type=int, default=2, help="Random: candidates")
    generate_parser.add_argument("--registered", type=int, default=6, help="Random: |V|")
    generate_parser.add_argument(
        "--pool", type=int, help="Random: |W| (default: 6, or 0 for delete variants)"
    )
    generate_parser.add_argument(
        "--max-bundle-size", type=int, default=3, help="Random: largest bundle"
    )
    generate_parser.add_argument(
        "--symmetry",
        choices=[s.value for s in SymmetryClass],
        default=SymmetryClass.SYMMETRIC.value,
        help="Random: bundling class",
    )
    generate_parser.add_argument("--budget", type=int, help="Random: budget")
    generate_parser.add_argument(
        "--unlimited", action="store_true", help="Random: unlimited budget"
    )
    generate_parser.add_argument("--seed", type=int, default=0, help="Random: seed")
    generate_parser.set_defaults(func=cmd_generate)

    # Bench command
    bench_parser = subparsers.add_parser(
        "bench",
        help="Time the path DP over a size grid",
        description="Emit CSV rows n,solver,milliseconds for random path instances",
    )
    bench_parser.add_argument("--solver", choices=["path-dp", "auto"], default="path-dp")
    bench_parser.add_argument("--sizes", type=int, nargs="+", help="Pool sizes")
    bench_parser.add_argument("--budget", type=int, help="Leader budget k")
    bench_parser.add_argument("--repeats", type=int, help="Runs per size")
    bench_parser.add_argument("--output", "-o", type=Path, help="CSV file (default: stdout)")
    bench_parser.set_defaults(func=cmd_bench)

    # Init command
    init_parser = subparsers.add_parser(
        "init",
        help="Initialize config.yaml file",
        description="Create config.yaml with default settings",
    )
    init_parser.add_argument("--force", "-f", action="store_true", help="Overwrite existing file")
    init_parser.add_argument(
        "--local",
        "-l",
        action="store_true",
        help=f"Create {LOCAL_CONFIG_NAME} in current directory (default: {CONFIG_DIR})",
    )
    init_parser.set_defaults(func=cmd_init)

    # Show-config command
    show_config_parser = subparsers.add_parser(
        "show-config",
        help="Display the configuration template",
        description="Show the full config.yaml template with all available options",
    )
    show_config_parser.set_defaults(func=cmd_show_config)

    # Show-schema command
    show_schema_parser = subparsers.add_parser(
        "show-schema",
        help="Display the instance JSON schema",
        description="Show the JSON schema of instance documents",
    )
    show_schema_parser.add_argument(
        "--pretty", "-p", action="store_true", help="Pretty-print JSON with syntax highlighting"
    )
    show_schema_parser.set_defaults(func=cmd_show_schema)

    # Version command
    version_parser = subparsers.add_parser("version", help="Show version information")
    version_parser.set_defaults(func=cmd_version)

    return parser


def main(argv: list[str] | None = None) -> None:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging("DEBUG" if args.verbose else None)

    if args.version:
        cmd_version(args)
        sys.exit(0)

    if not args.command:
        parser.print_help()
        sys.exit(0)

    try:
        code = args.func(args)
    except (BundleControlError, ValidationError, ValueError, OSError) as e:
        console.print(f"[bold red]Error:[/bold red] {escape(str(e))}")
        code = 2
    sys.exit(code)


if __name__ == "__main__":
    main()
