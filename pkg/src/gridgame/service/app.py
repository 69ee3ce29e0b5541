"""FastAPI application wrapping the campaign engine.

Every route is synchronous and stateless: the scenario document travels
in the request, results travel back as JSON, and bundle files are read
back from a scratch directory so responses carry the exact bytes of the
on-disk format.
"""

from __future__ import annotations

import base64
import csv
import io
import json
import tempfile
from pathlib import Path

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..alerts import (
    ALERTS_FILE,
    AlertFormatError,
    LABELS_FILE,
    MANIFEST_FILE,
    ROUNDS_FILE,
    export_dataset,
)
from ..attack_graph import (
    Derivation,
    facts_from_topology,
    logical_attack_graph,
    write_graph_csv,
)
from ..centrality import current_flow_betweenness, edge_resistances
from ..engine import method_comparison, run_campaign, sweep
from ..scenario import (
    ScenarioConfig,
    ScenarioValidationError,
    apply_overrides,
    load_scenario_dict,
)
from .schemas import (
    BundlePayload,
    CampaignRequest,
    CampaignResponse,
    CentralityResponse,
    ComparisonRequest,
    ComparisonResponse,
    GraphResponse,
    HealthResponse,
    InspectRequest,
    ScenarioResponse,
    SweepRequest,
    SweepResponse,
    SweepRow,
    ValidateRequest,
    ValidateResponse,
)

SWEEP_COLUMNS = (
    "sensors", "funds", "mean_complexity", "ci_low", "ci_high",
    "seeds", "rounds_per_seed",
)


def _load_config(doc: dict) -> ScenarioConfig:
    try:
        return load_scenario_dict(doc)
    except ScenarioValidationError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _read_bundle_payload(bundle_dir: Path) -> BundlePayload:
    return BundlePayload(
        name=bundle_dir.name,
        manifest_json=(bundle_dir / MANIFEST_FILE).read_text(),
        rounds_jsonl=(bundle_dir / ROUNDS_FILE).read_text(),
        labels_csv=(bundle_dir / LABELS_FILE).read_text(),
        alerts_b64=base64.b64encode(
            (bundle_dir / ALERTS_FILE).read_bytes()
        ).decode("ascii"),
    )


def _sweep_csv(rows: list) -> str:
    with io.StringIO() as buf:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([row[col] for col in SWEEP_COLUMNS])
        return buf.getvalue()


def create_app() -> FastAPI:
    app = FastAPI(title="gridgame", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", name="gridgame", version=__version__)

    @app.post("/validate", response_model=ValidateResponse)
    def validate(request: ValidateRequest) -> ValidateResponse:
        try:
            config = load_scenario_dict(request.scenario)
        except ScenarioValidationError as exc:
            return ValidateResponse(valid=False, errors=[str(exc)])
        topo = config.topology
        return ValidateResponse(
            valid=True,
            fingerprint=config.fingerprint(),
            nodes=len(topo.nodes),
            edges=len(topo.edges),
            subnets=len(topo.subnets),
            entry_points=list(topo.entry_points),
        )

    @app.post("/campaigns", response_model=CampaignResponse)
    def campaigns(request: CampaignRequest) -> CampaignResponse:
        try:
            doc = apply_overrides(
                request.scenario,
                seed=request.seed,
                rounds=request.rounds,
                method=request.method,
                sensor_count=request.sensors,
                funds=request.funds,
            )
        except (ScenarioValidationError, KeyError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        config = _load_config(doc)
        log = run_campaign(config)
        with tempfile.TemporaryDirectory(prefix="gridgame-") as scratch:
            bundle_dir = export_dataset(log, Path(scratch) / "bundle")
            payload = _read_bundle_payload(bundle_dir)
        return CampaignResponse(manifest=log.manifest(), bundle=payload)

    @app.post("/sweeps", response_model=SweepResponse)
    def sweeps(request: SweepRequest) -> SweepResponse:
        _load_config(request.scenario)
        try:
            rows = sweep(
                request.scenario,
                request.sensor_counts,
                request.fund_levels,
                request.seeds,
                jobs=request.jobs,
            )
        except (ScenarioValidationError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return SweepResponse(
            rows=[SweepRow(**row) for row in rows],
            csv=_sweep_csv(rows),
        )

    @app.post("/comparisons", response_model=ComparisonResponse)
    def comparisons(request: ComparisonRequest) -> ComparisonResponse:
        scenario = request.scenario
        if request.rounds is not None:
            scenario = apply_overrides(scenario, rounds=request.rounds)
        _load_config(scenario)
        with tempfile.TemporaryDirectory(prefix="gridgame-") as scratch:
            try:
                manifest = method_comparison(
                    scenario,
                    request.seeds,
                    scratch,
                    jobs=request.jobs,
                )
            except (ScenarioValidationError, ValueError, AlertFormatError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            bundles = [
                _read_bundle_payload(Path(scratch) / entry["bundle"])
                for entry in manifest["bundles"]
            ]
            manifest_json = (Path(scratch) / MANIFEST_FILE).read_text()
        return ComparisonResponse(
            manifest=manifest, manifest_json=manifest_json, bundles=bundles
        )

    @app.post("/inspect/centrality", response_model=CentralityResponse)
    def inspect_centrality(request: InspectRequest) -> CentralityResponse:
        config = _load_config(request.scenario)
        topo = config.topology
        node_ids = topo.sorted_node_ids()
        resistance = edge_resistances(topo, {}, config.engine.c_min)
        links = [edge.key() for edge in topo.edges]
        scores = current_flow_betweenness(node_ids, links, resistance)
        with io.StringIO() as buf:
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(("node_id", "score"))
            for node_id in node_ids:
                writer.writerow((node_id, repr(scores[node_id])))
            text = buf.getvalue()
        return CentralityResponse(
            csv=text,
            rows=[
                {"node_id": n, "score": scores[n]} for n in node_ids
            ],
        )

    @app.post("/inspect/graph", response_model=GraphResponse)
    def inspect_graph(request: InspectRequest) -> GraphResponse:
        config = _load_config(request.scenario)
        derivation = Derivation(facts_from_topology(config.topology))
        lag = logical_attack_graph(derivation)
        with tempfile.TemporaryDirectory(prefix="gridgame-") as scratch:
            write_graph_csv(lag, scratch)
            vertices = (Path(scratch) / "VERTICES.CSV").read_text()
            arcs = (Path(scratch) / "ARCS.CSV").read_text()
        return GraphResponse(
            vertices_csv=vertices,
            arcs_csv=arcs,
            vertex_count=len(lag.vertices),
            arc_count=len(lag.arcs),
        )

    @app.post("/inspect/scenario", response_model=ScenarioResponse)
    def inspect_scenario(request: InspectRequest) -> ScenarioResponse:
        config = _load_config(request.scenario)
        return ScenarioResponse(
            scenario=config.document, fingerprint=config.fingerprint()
        )

    return app


app = create_app()
