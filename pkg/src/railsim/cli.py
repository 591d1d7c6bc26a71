"""`sim`: thin command-line client for the scenario service.

Every command goes through the HTTP interface: against a remote server
when --server is given, otherwise against an in-process instance of the
app over an ASGI transport (no socket needed). Exit codes: 0 all checks
pass, 1 a check or criterion failed, 2 usage errors such as an unknown
scenario.

Flag values override configuration-file values.
"""

from __future__ import annotations

import asyncio
import json
from typing import Any

import click
import httpx
import yaml


def _request(server: str | None, method: str, path: str, payload: dict | None = None) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.request(method, path, json=payload)

    from .service import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport, base_url="http://sim", timeout=None) as client:
            return await client.request(method, path, json=payload)

    return asyncio.run(go())


def _load_config(path: str | None) -> dict[str, Any]:
    if not path:
        return {}
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return data or {}


def _print_report(report: dict, out: str) -> None:
    if out == "json":
        click.echo(json.dumps(report, indent=2, sort_keys=True))
        return
    click.echo(f"scenario: {report['scenario']}  seed: {report['seed']}")
    for check in report["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        click.echo(
            f"  [{mark}] {check['name']}: measured {check['measured']}"
            f" expected {check['expected']} (tol {check['tolerance']:g})"
        )
        click.echo(f"         {check['claim']}")
    for table, rows in report.get("tables", {}).items():
        click.echo(f"  table {table}:")
        for key, value in rows.items():
            click.echo(f"    {key:40s} {value}")
    click.echo(f"result: {'PASS' if report['passed'] else 'FAIL'}")


@click.group()
@click.option("--server", default=None, envvar="SIM_SERVER", help="Remote service URL; default runs in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Scenario runner and verification client for the photonic simulator."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.argument("scenario_id")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="YAML parameter/config file.")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Choice(["json", "table"]), default="table")
@click.option("--sweep", is_flag=True, help="Enumerate input placements and report the minimum.")
@click.option("--quick", is_flag=True, help="Cap expensive sweeps at sampled placements.")
@click.option("--copies", type=int, default=None, help="Copies exponent for multirail scenarios.")
@click.option("--k", "k_param", type=int, default=None, help="Tensor-power exponent for compile-hadamard.")
@click.option("--levels", type=int, default=None, help="Chain depth for temporal-eraser.")
@click.option("--param", "extra", multiple=True, help="Extra key=value parameter (repeatable).")
@click.pass_context
def run(ctx, scenario_id, config_path, seed, out, sweep, quick, copies, k_param, levels, extra) -> None:
    """Run one named scenario and print its report."""
    params = _load_config(config_path)
    if scenario_id.startswith("dna") and params and "config" not in params:
        params = {"config": params}
    for item in extra:
        key, _, value = item.partition("=")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    if copies is not None:
        params["copies"] = copies
    if k_param is not None:
        params["k"] = k_param
    if levels is not None:
        params["levels"] = levels
    payload = {"scenario": scenario_id, "params": params, "seed": seed, "sweep": sweep, "quick": quick}
    resp = _request(ctx.obj["server"], "POST", "/run", payload)
    if resp.status_code == 404:
        click.echo(f"unknown scenario {scenario_id!r}; try `sim scenarios`", err=True)
        raise SystemExit(2)
    if resp.status_code != 200:
        click.echo(f"error: {resp.text}", err=True)
        raise SystemExit(2)
    report = resp.json()
    _print_report(report, out)
    raise SystemExit(0 if report["passed"] else 1)


@main.command("verify-all")
@click.option("--quick/--full", default=True, help="Sampled sweeps vs exhaustive runs.")
@click.pass_context
def verify_all(ctx, quick: bool) -> None:
    """Run every acceptance criterion; one line each."""
    resp = _request(ctx.obj["server"], "POST", "/verify", {"quick": quick})
    if resp.status_code != 200:
        click.echo(f"error: {resp.text}", err=True)
        raise SystemExit(2)
    body = resp.json()
    for crit in body["criteria"]:
        mark = "PASS" if crit["passed"] else "FAIL"
        click.echo(f"[{mark}] {crit['name']} ({crit['seconds']:.2f}s) {'; '.join(crit['details'])}")
    click.echo("all passed" if body["all_passed"] else "FAILURES present")
    raise SystemExit(0 if body["all_passed"] else 1)


@main.command()
@click.pass_context
def scenarios(ctx) -> None:
    """List available scenarios."""
    resp = _request(ctx.obj["server"], "GET", "/scenarios")
    for info in resp.json():
        click.echo(f"{info['id']:24s} {info['summary']}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True, help="Protocol YAML config.")
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write JSON-lines transcript here.")
@click.pass_context
def transcript(ctx, config_path, seed, out_path) -> None:
    """Run a protocol scenario and export its message transcript."""
    config = _load_config(config_path)
    resp = _request(ctx.obj["server"], "POST", "/transcript", {"config": config, "seed": seed})
    if resp.status_code != 200:
        click.echo(f"error: {resp.text}", err=True)
        raise SystemExit(2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(resp.text)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(resp.text, nl=False)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("railsim.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
