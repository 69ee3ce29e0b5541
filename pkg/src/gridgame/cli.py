"""Command-line client.

Every subcommand talks to the HTTP API: against a remote server when
--server is given, otherwise against an in-process instance of the same
application, so local runs and remote runs produce identical artifacts.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import asyncio
import base64
import json
import os
import sys
from pathlib import Path

import httpx

from . import __version__
from .engine import MIN_COMPARISON_ROUNDS
from .scenario import default_scenario_text

SEED_ENV_VAR = "GRIDGAME_SEED"
DEFAULT_SCENARIO_NAME = "default"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class CommandError(Exception):
    """Runtime failure; message goes to stderr, exit code 1."""


class ServiceClient:
    """Minimal JSON-over-HTTP client; in-process unless --server is set."""

    def __init__(self, server: str | None):
        self._remote = None
        self._app = None
        if server:
            self._remote = httpx.Client(base_url=server, timeout=None)
        else:
            from .service import create_app
            self._app = create_app()

    def close(self):
        if self._remote is not None:
            self._remote.close()

    def _request(self, method: str, path: str, payload: dict | None):
        if self._remote is not None:
            return self._remote.request(method, path, json=payload)

        async def go():
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(
                transport=transport,
                base_url="http://gridgame.internal",
                timeout=None,
            ) as client:
                return await client.request(method, path, json=payload)

        return asyncio.run(go())

    def _call(self, method: str, path: str, payload: dict | None) -> dict:
        try:
            response = self._request(method, path, payload)
        except httpx.HTTPError as exc:
            raise CommandError(f"cannot reach service: {exc}") from exc
        if response.status_code >= 400:
            raise CommandError(_error_detail(response))
        return response.json()

    def post(self, path: str, payload: dict) -> dict:
        return self._call("POST", path, payload)

    def get(self, path: str) -> dict:
        return self._call("GET", path, None)


def _error_detail(response) -> str:
    try:
        detail = response.json().get("detail", "")
    except ValueError:
        detail = response.text
    if isinstance(detail, list):  # pydantic validation report
        detail = "; ".join(
            f"{'.'.join(str(p) for p in item.get('loc', []))}: {item.get('msg', '')}"
            for item in detail
        )
    return f"service error ({response.status_code}): {detail}"


def read_scenario(path_arg: str) -> dict:
    if path_arg == DEFAULT_SCENARIO_NAME:
        return json.loads(default_scenario_text())
    path = Path(path_arg)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise CommandError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CommandError(f"scenario {path} is not valid JSON: {exc}") from exc


def resolve_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise CommandError(
            f"{SEED_ENV_VAR} must be an integer, got {env!r}"
        ) from None


def spread_seeds(base: int | None, count: int) -> list:
    start = 1 if base is None else base
    return [start + i for i in range(count)]


def write_bundle(bundle: dict, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(bundle["manifest_json"])
    (out_dir / "rounds.jsonl").write_text(bundle["rounds_jsonl"])
    (out_dir / "labels.csv").write_text(bundle["labels_csv"])
    (out_dir / "alerts.u2").write_bytes(base64.b64decode(bundle["alerts_b64"]))
    return out_dir


def _int_list(text: str) -> list:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text: str) -> list:
    return [part for part in text.split(",") if part != ""]


# -- subcommands --------------------------------------------------------------

def cmd_run(args, client: ServiceClient) -> int:
    scenario = read_scenario(args.scenario)
    payload = {
        "scenario": scenario,
        "seed": resolve_seed(args),
        "rounds": args.rounds,
        "method": args.method,
        "sensors": args.sensors,
        "funds": args.funds,
    }
    result = client.post("/campaigns", payload)
    out = write_bundle(result["bundle"], Path(args.out))
    manifest = result["manifest"]
    print(f"wrote bundle to {out}")
    print(
        f"seed {manifest['seed']}  method {manifest['method']}  "
        f"rounds {manifest['rounds']}  events {manifest['event_count']} "
        f"({manifest['attack_event_count']} attack, "
        f"{manifest['background_event_count']} background)"
    )
    return EXIT_OK


def cmd_sweep(args, client: ServiceClient) -> int:
    scenario = read_scenario(args.scenario)
    payload = {
        "scenario": scenario,
        "sensor_counts": args.sensors,
        "fund_levels": args.funds,
        "seeds": spread_seeds(resolve_seed(args), args.seeds),
        "jobs": args.jobs,
    }
    result = client.post("/sweeps", payload)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "sweep.csv"
    target.write_text(result["csv"])
    print(f"wrote {target}")
    for row in result["rows"]:
        if row["ci_low"] is None:
            ci = "ci n/a (single seed)"
        else:
            ci = f"ci [{row['ci_low']:.3f}, {row['ci_high']:.3f}]"
        print(
            f"sensors {row['sensors']:>3}  funds {row['funds']:<7} "
            f"mean complexity {row['mean_complexity']:.3f} {ci}"
        )
    return EXIT_OK


def cmd_compare_methods(args, client: ServiceClient) -> int:
    scenario = read_scenario(args.scenario)
    payload = {
        "scenario": scenario,
        "seeds": spread_seeds(resolve_seed(args), args.seeds),
        "rounds": args.rounds,
        "jobs": args.jobs,
    }
    result = client.post("/comparisons", payload)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(result["manifest_json"])
    for bundle in result["bundles"]:
        write_bundle(bundle, out_dir / bundle["name"])
    print(f"wrote {len(result['bundles'])} bundles under {out_dir}")
    return EXIT_OK


def cmd_inspect(args, client: ServiceClient) -> int:
    scenario = read_scenario(args.scenario)
    if args.what == "centrality":
        result = client.post("/inspect/centrality", {"scenario": scenario})
        if args.out:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            target = out_dir / "centrality.csv"
            target.write_text(result["csv"])
            print(f"wrote {target}")
        else:
            sys.stdout.write(result["csv"])
        return EXIT_OK
    if args.what == "graph":
        result = client.post("/inspect/graph", {"scenario": scenario})
        out_dir = Path(args.out) if args.out else Path(".")
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "VERTICES.CSV").write_text(result["vertices_csv"])
        (out_dir / "ARCS.CSV").write_text(result["arcs_csv"])
        print(
            f"wrote {out_dir / 'VERTICES.CSV'} ({result['vertex_count']} vertices), "
            f"{out_dir / 'ARCS.CSV'} ({result['arc_count']} arcs)"
        )
        return EXIT_OK
    # scenario: resolved document, pretty-printed
    result = client.post("/inspect/scenario", {"scenario": scenario})
    text = json.dumps(result["scenario"], indent=2, sort_keys=True) + "\n"
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / "scenario.json"
        target.write_text(text)
        print(f"wrote {target} (fingerprint {result['fingerprint'][:12]})")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args, client: ServiceClient) -> int:
    scenario = read_scenario(args.scenario)
    result = client.post("/validate", {"scenario": scenario})
    if not result["valid"]:
        for line in result["errors"]:
            print(f"invalid: {line}", file=sys.stderr)
        return EXIT_RUNTIME
    print(
        f"valid: {result['nodes']} nodes, {result['edges']} edges, "
        f"{result['subnets']} subnets, entry points "
        f"{', '.join(result['entry_points'])}"
    )
    print(f"fingerprint {result['fingerprint']}")
    return EXIT_OK


def cmd_serve(args, _client=None) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridgame",
        description=(
            "Simulate attacker-defender campaigns on power-grid IT/OT "
            "topologies and export labeled alert datasets."
        ),
    )
    parser.add_argument("--version", action="version", version=f"gridgame {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, out_required=True):
        p.add_argument(
            "--scenario", required=True,
            help=f"scenario JSON path, or '{DEFAULT_SCENARIO_NAME}' for the packaged one",
        )
        p.add_argument("--server", default=None, help="remote service URL (default: in-process)")
        if out_required is not None:
            p.add_argument("--out", required=out_required, help="output directory")

    run_p = sub.add_parser("run", help="run one campaign and export its bundle")
    add_common(run_p)
    run_p.add_argument("--seed", type=int, default=None,
                       help=f"campaign seed (falls back to ${SEED_ENV_VAR}, then the scenario)")
    run_p.add_argument("--rounds", type=int, default=None, help="override round count")
    run_p.add_argument("--method", default=None,
                       choices=["with_defender", "single_attack_random", "optimal_no_defender"])
    run_p.add_argument("--sensors", type=int, default=None, help="override sensor count")
    run_p.add_argument("--funds", default=None, choices=["low", "medium", "high"],
                       help="override fund scenario")
    run_p.set_defaults(handler=cmd_run)

    sweep_p = sub.add_parser("sweep", help="complexity means over a sensors x funds grid")
    add_common(sweep_p)
    sweep_p.add_argument("--sensors", type=_int_list, required=True,
                         help="comma-separated sensor counts, e.g. 5,10,15")
    sweep_p.add_argument("--funds", type=_str_list, required=True,
                         help="comma-separated fund levels, e.g. low,medium,high")
    sweep_p.add_argument("--seeds", type=int, required=True,
                         help="number of seeds per cell")
    sweep_p.add_argument("--seed", type=int, default=None,
                         help="first seed of the range (default 1)")
    sweep_p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                         help="parallel workers (default: logical cores)")
    sweep_p.set_defaults(handler=cmd_sweep)

    cmp_p = sub.add_parser("compare-methods",
                           help="bundles for every generation method per seed")
    add_common(cmp_p)
    cmp_p.add_argument("--seeds", type=int, required=True, help="number of seeds")
    cmp_p.add_argument("--seed", type=int, default=None,
                       help="first seed of the range (default 1)")
    cmp_p.add_argument("--rounds", type=int, default=MIN_COMPARISON_ROUNDS,
                       help="rounds per campaign (minimum %(default)s)")
    cmp_p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="parallel workers (default: logical cores)")
    cmp_p.set_defaults(handler=cmd_compare_methods)

    inspect_p = sub.add_parser("inspect", help="export analysis views of a scenario")
    inspect_p.add_argument("what", choices=["centrality", "graph", "scenario"],
                           help="what to export")
    add_common(inspect_p, out_required=False)
    inspect_p.set_defaults(handler=cmd_inspect)

    validate_p = sub.add_parser("validate", help="check a scenario file")
    validate_p.add_argument(
        "--scenario", required=True,
        help=f"scenario JSON path, or '{DEFAULT_SCENARIO_NAME}' for the packaged one",
    )
    validate_p.add_argument("--server", default=None,
                            help="remote service URL (default: in-process)")
    validate_p.set_defaults(handler=cmd_validate)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        return args.handler(args)
    client = ServiceClient(getattr(args, "server", None))
    try:
        return args.handler(args, client)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - last resort, keep stderr structured
        if os.environ.get("GRIDGAME_DEBUG"):
            raise
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
