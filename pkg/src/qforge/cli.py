"""Command-line entry point.

Every command writes one JSON run record ``{config, version, wall_time,
payload}``.  The density sweep instead writes JSON lines, one record per
line in prime order, followed by the run record holding the aggregate.

Exit status is 0 on success, 1 on a domain error and 2 on a bad
configuration.  The last two print an error object ``{error, message}``.
"""
from __future__ import annotations

import json
import logging
import os
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from typing import Optional

import click

from . import runs
from .config import build_config, load_config_file
from .density import prime_sweep
from .errors import ConfigError, QForgeError

try:
    VERSION = version("qforge")
except PackageNotFoundError:  # running from a source tree
    VERSION = "0.0.0+local"


def _setup_logging() -> None:
    level = os.environ.get("QF_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _parse_set(values) -> dict:
    out = {}
    for item in values:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            out[key.strip()] = raw
    return out


def _emit(lines: list[str], out: Optional[str]) -> None:
    text = "".join(line + "\n" for line in lines)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def execute(data: dict) -> list[str]:
    """Validate ``data`` as a run config, run it and return the output lines."""
    cfg = build_config(data)
    echo = cfg.model_dump(mode="json")
    start = time.perf_counter()
    if cfg.command == "density":
        result = prime_sweep(runs.density_sweep_config(cfg), threads=cfg.threads)
        lines = [_dumps(r) for r in result["records"]]
        payload = {"kind": "density-aggregate", **result["aggregate"]}
    else:
        lines = []
        payload = runs.RUNNERS[cfg.command](cfg)
    record = {
        "kind": "run",
        "config": echo,
        "version": VERSION,
        "wall_time": round(time.perf_counter() - start, 6),
        "payload": payload,
    }
    return lines + [_dumps(record)]


def run_and_exit(data: dict) -> None:
    out = data.get("out")
    try:
        lines = execute(data)
    except ConfigError as exc:
        click.echo(_dumps(exc.to_dict()))
        sys.exit(2)
    except QForgeError as exc:
        click.echo(_dumps(exc.to_dict()))
        sys.exit(1)
    _emit(lines, out)


def _common(f):
    f = click.option("--set", "sets", multiple=True, metavar="KEY=VALUE",
                     help="Set any config field; VALUE is parsed as JSON when possible.")(f)
    return click.pass_context(f)


def _merge(ctx: click.Context, command: str, sets, **fields) -> dict:
    data = dict(ctx.obj["base"])
    if data.get("command", command) != command:
        raise ConfigError(f"config file is for {data['command']!r}, not {command!r}")
    data["command"] = command
    for key, val in fields.items():
        if val is not None and val != ():
            data[key] = list(val) if isinstance(val, tuple) else val
    data.update(_parse_set(sets))
    data.update(ctx.obj["globals"])
    return data


def _guarded(fn):
    def wrapper(*args, **kwargs):
        try:
            data = fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(_dumps(exc.to_dict()))
            sys.exit(2)
        run_and_exit(data)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group(invoke_without_command=True)
@click.option("--config", "config_path", type=str, default=None, help="TOML or JSON run config.")
@click.option("--seed", type=int, default=None, help="64-bit seed (default 0).")
@click.option("--out", type=str, default=None, help="Output file (default stdout).")
@click.option("--threads", type=int, default=None, help="Worker processes for sweeps.")
@click.version_option(VERSION, prog_name="qforge")
@click.pass_context
def main(ctx, config_path, seed, out, threads):
    """Exact experiments with points on elliptic curves with full 2-torsion."""
    _setup_logging()
    try:
        base = load_config_file(config_path) if config_path else {}
    except ConfigError as exc:
        click.echo(_dumps(exc.to_dict()))
        sys.exit(2)
    g = {k: v for k, v in (("seed", seed), ("out", out), ("threads", threads)) if v is not None}
    ctx.obj = {"base": base, "globals": g}
    if ctx.invoked_subcommand is None:
        if not base:
            click.echo(ctx.get_help())
            return
        data = dict(base)
        data.update(g)
        run_and_exit(data)


@main.command()
@click.option("--curve", help="Roots e1,e2,e3.")
@click.option("--base-point", "base_point", help="x,y")
@click.option("--p", type=int)
@click.option("--restarts", type=int)
@click.option("--ext", "extensions", type=int, multiple=True, help="Quadratic extension(s) d to allow.")
@click.option("--log/--no-log", "log", default=None, help="Include the per-restart search log.")
@_common
@_guarded
def forge(ctx, sets, **fields):
    """Search monochromatic lines and trace the resulting points."""
    return _merge(ctx, "forge", sets, **fields)


@main.command()
@click.option("--curve")
@click.option("--base-point", "base_point")
@click.option("--p", type=int)
@click.option("--t-min", "t_min", type=int)
@click.option("--t-max", "t_max", type=int)
@click.option("--ext", type=int)
@_common
@_guarded
def scan(ctx, sets, **fields):
    """Evaluate a family of linear forms and report which values are squares."""
    return _merge(ctx, "scan", sets, **fields)


@main.command()
@click.option("--prime-min", "prime_min", type=int)
@click.option("--prime-max", "prime_max", type=int)
@click.option("--n", type=int)
@click.option("--k", type=int)
@click.option("--m", type=int)
@_common
@_guarded
def density(ctx, sets, **fields):
    """Sweep primes: multiquadratic counts and optional avoidance witnesses."""
    return _merge(ctx, "density", sets, **fields)


@main.command()
@click.option("--p", type=int)
@click.option("--k", type=int)
@click.option("--n", type=int)
@click.option("--m", type=int)
@click.option("--curve")
@click.option("--base-point", "base_point")
@_common
@_guarded
def avoid(ctx, sets, **fields):
    """Search one prime for an avoidance witness."""
    return _merge(ctx, "avoid", sets, **fields)


@main.command()
@click.option("--curve")
@click.option("--point", "points", multiple=True, help="x,y (repeatable).")
@click.option("--bound", "B", type=int)
@_common
@_guarded
def certify(ctx, sets, **fields):
    """Certify bounded independence of rational points modulo torsion."""
    return _merge(ctx, "certify", sets, **fields)


@main.command()
@click.option("--curve")
@click.option("--base-point", "base_point")
@click.option("--schedule", multiple=True, type=int, help="Restarts per step (repeatable).")
@click.option("--ext", "extensions", type=int, multiple=True)
@click.option("--bound", "B", type=int)
@_common
@_guarded
def growth(ctx, sets, **fields):
    """Forge at growing budgets and grow a certified independent set."""
    return _merge(ctx, "growth", sets, **fields)


@main.command()
@click.option("--curve")
@click.option("--base-point", "base_point")
@click.option("--p", type=int)
@click.option("--point", "points", multiple=True, help="Weierstrass point x,y to map to the quartic.")
@click.option("--quartic-point", "quartic_points", multiple=True, help="Quartic point u,v to map back.")
@_common
@_guarded
def convert(ctx, sets, **fields):
    """Quartic model of a curve and base point, with optional point maps."""
    return _merge(ctx, "convert", sets, **fields)


if __name__ == "__main__":
    main()
