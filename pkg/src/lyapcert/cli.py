"""Command-line front end.

The CLI is a thin client of the HTTP service: every run is posted to
the ``/run`` endpoint, against an in-process application by default or
a remote server via ``--server``.  Reports and CSV side files are
written locally; exit status 0 on success, 2 when certification found a
counterexample, 3 when a critical point was hit, 4 on config errors.
"""

import asyncio
import json
import sys

import click
import httpx

from .config import parse_config
from .errors import ConfigError
from .experiments import EXIT_CODES, EXIT_CONFIG_ERROR, emit, report_json


def _fail_config(message: str):
    json.dump({"error": "config", "message": message}, sys.stderr, sort_keys=True)
    sys.stderr.write("\n")
    sys.exit(EXIT_CONFIG_ERROR)


def _post_run(payload: dict, server: str):
    async def go():
        if server:
            async with httpx.AsyncClient(base_url=server, timeout=600.0) as client:
                return await client.post("/run", json=payload)
        from .service.app import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://lyapcert.local", timeout=600.0
        ) as client:
            return await client.post("/run", json=payload)

    return asyncio.run(go())


def _load_config(config_path, analysis_kind, overrides):
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        _fail_config(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        _fail_config(f"config is not valid JSON: {exc}")

    analysis = data.get("analysis")
    if not isinstance(analysis, dict):
        _fail_config("config must contain an analysis object")
    found = analysis.get("kind", analysis_kind)
    if found != analysis_kind:
        _fail_config(
            f"analysis kind {found!r} in config does not match subcommand {analysis_kind!r}"
        )
    analysis["kind"] = analysis_kind
    for key, value in overrides.items():
        if value is not None:
            if key == "seed":
                data["seed"] = value
            else:
                analysis[key] = value
    try:
        config = parse_config(data)
    except ConfigError as exc:
        _fail_config(str(exc))
    return config


def _execute(config, out, server):
    payload = config.canonical_dict()
    payload.pop("out", None)
    try:
        response = _post_run(payload, server)
    except httpx.HTTPError as exc:
        _fail_config(f"service unreachable: {exc}")
    if response.status_code >= 400:
        _fail_config(f"service rejected the config: {response.text}")
    report = response.json()
    status = report.get("status", "ok")
    out_dir = out or config.out
    if status == "critical_point":
        json.dump(report.get("error", {}), sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        sys.exit(EXIT_CODES[status])
    if out_dir:
        emit(report, out_dir)
    else:
        sys.stdout.write(report_json(report))
    sys.exit(EXIT_CODES.get(status, 0))


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True, type=click.Path(), help="experiment config JSON")(fn)
    fn = click.option("--out", default=None, type=click.Path(), help="output directory (default: print report)")(fn)
    fn = click.option("--seed", default=None, type=int, help="override the config seed")(fn)
    fn = click.option("--server", default=None, help="base URL of a running service (default: in-process)")(fn)
    return fn


@click.group()
def main():
    """Lyapunov exponent estimation and expansion certification."""


@main.command()
@_common_options
def orbit(config_path, out, seed, server):
    """Birkhoff average of the log stretch along a lifted orbit."""
    config = _load_config(config_path, "orbit", {"seed": seed})
    _execute(config, out, server)


@main.command()
@_common_options
def spectrum(config_path, out, seed, server):
    """Lyapunov spectrum estimate along one orbit."""
    config = _load_config(config_path, "spectrum", {"seed": seed})
    _execute(config, out, server)


@main.command()
@_common_options
@click.option("--resolution", default=None, type=int, help="override base_resolution")
@click.option("--max-period", default=None, type=int, help="cross-check against periodic orbits")
def extremal(config_path, out, seed, server, resolution, max_period):
    """Extremal exponent estimates from the transition-graph discretization."""
    config = _load_config(
        config_path, "extremal",
        {"seed": seed, "base_resolution": resolution, "max_period": max_period},
    )
    _execute(config, out, server)


@main.command()
@_common_options
@click.option("--resolution", default=None, type=int, help="override base_samples")
@click.option("--lambda", "lam", default=None, type=float, help="expansion rate to certify")
@click.option("--big-n", default=None, type=int, help="onset time N")
def certify(config_path, out, seed, server, resolution, lam, big_n):
    """Certify uniform expansion or produce a counterexample."""
    config = _load_config(
        config_path, "certify",
        {"seed": seed, "base_samples": resolution, "lambda": lam, "big_n": big_n},
    )
    _execute(config, out, server)


@main.command()
@_common_options
@click.option("--resolution", default=None, type=int, help="override base_samples")
@click.option("--lambda", "lam", default=None, type=float, help="expansion rate to certify")
@click.option("--big-n", default=None, type=int, help="onset time N")
def fibred(config_path, out, seed, server, resolution, lam, big_n):
    """Certify expansion restricted to a declared invariant subbundle."""
    config = _load_config(
        config_path, "fibred_certify",
        {"seed": seed, "base_samples": resolution, "lambda": lam, "big_n": big_n},
    )
    _execute(config, out, server)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("lyapcert.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
