"""Local HTTP service feeding the interactive explorer.

GET /api/basins      label-grid JSON (or PPM bytes with format=ppm)
GET /api/orbit       orbit points, step norms, termination, certificate
GET /api/attractors  attractor table only
GET /api/health      liveness probe

Responses are pure functions of the query string: results are cached in a
small LRU keyed by the canonical parameter tuple, and rendering happens in
a bounded worker pool so concurrent requests queue fairly instead of
oversubscribing the CPU.  Malformed parameters give 400 with a reason;
domain errors (infeasible configuration) give 422 carrying the gap.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import jsonout
from .basins import (
    build_attractor_table,
    default_palette,
    encode_ppm,
    grid_to_json,
    render_basins,
)
from .cli import SCHEMA, orbit_to_json, parse_line, parse_region, parse_resolution, parse_set, set_to_json
from .divergence import separating_functional
from .dynamics import DRConfig, dr_iterate
from .exceptions import DrplaneError, EmptyTable, NotSeparable
from .geometry import Line, feasible_points, set_distance
from .stability import local_convergence_certificate

MAX_RESOLUTION = 1024
MAX_ORBIT_ITERS = 100_000


class _LRU:
    def __init__(self, size=128):
        self.size = size
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        return None

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.size:
                self._data.popitem(last=False)


class _BadRequest(Exception):
    pass


def _param(params, name, default=None, required=False):
    if name in params:
        return params[name]
    if required:
        raise _BadRequest(f"missing parameter {name!r}")
    return default


def _json_response(doc, status=200):
    return Response(
        content=jsonout.dumps(doc),
        status_code=status,
        media_type="application/json",
    )


def create_app(render_workers: int = 4, cache_size: int = 128, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="drplane explorer service")
    cache = _LRU(cache_size)
    pool = ThreadPoolExecutor(max_workers=max(1, render_workers))

    def parse_pair(params):
        try:
            conic = parse_set(_param(params, "set", required=True))
            line = parse_line(_param(params, "line", required=True))
        except (ValueError, DrplaneError) as exc:
            raise _BadRequest(str(exc))
        return conic, line

    def run_pooled(fn):
        return pool.submit(fn).result()

    @app.exception_handler(_BadRequest)
    async def _bad_request_handler(request: Request, exc: _BadRequest):
        return JSONResponse(status_code=400, content={"reason": str(exc)})

    @app.get("/api/health")
    def health():
        return {"status": "ok", "schema": SCHEMA}

    @app.get("/api/attractors")
    def attractors(request: Request):
        params = dict(request.query_params)
        key = ("attractors", tuple(sorted(params.items())))
        hit = cache.get(key)
        if hit is not None:
            return Response(content=hit, media_type="application/json")
        conic, line = parse_pair(params)
        try:
            region = parse_region(_param(params, "region", default="-4:4:-4:4"))
            max_period = int(_param(params, "max_period", default="5"))
            if not (1 <= max_period <= 16):
                raise ValueError("max_period must be in [1, 16]")
        except ValueError as exc:
            raise _BadRequest(str(exc))
        try:
            table = run_pooled(
                lambda: build_attractor_table(conic, line, region, max_period)
            )
        except EmptyTable:
            gap = set_distance(conic, line)
            return _json_response({"reason": "infeasible configuration", "gap": gap}, status=422)
        doc = {
            "schema": SCHEMA,
            "set": set_to_json(conic),
            "line": set_to_json(line),
            "attractors": [
                {
                    "label": e.label,
                    "kind": e.kind,
                    "period": e.period,
                    "point": [float(e.point[0]), float(e.point[1])],
                    "cycle": [[float(x), float(y)] for x, y in e.cycle],
                }
                for e in table.entries
            ],
        }
        body = jsonout.dumps(doc)
        cache.put(key, body)
        return Response(content=body, media_type="application/json")

    @app.get("/api/basins")
    def basins(request: Request):
        params = dict(request.query_params)
        fmt = _param(params, "format", default="json")
        key = ("basins", tuple(sorted(params.items())))
        hit = cache.get(key)
        if hit is not None:
            body, media = hit
            return Response(content=body, media_type=media)
        conic, line = parse_pair(params)
        try:
            region = parse_region(_param(params, "region", required=True))
            width, height = parse_resolution(_param(params, "res", required=True))
            iters = int(_param(params, "iters", default="1000"))
            match_tol = float(_param(params, "match_tol", default="1e-3"))
            max_period = int(_param(params, "max_period", default="5"))
            threads = int(_param(params, "threads", default="1"))
            if fmt not in ("json", "ppm"):
                raise ValueError(f"unknown format {fmt!r}")
            if not (1 <= width <= MAX_RESOLUTION and 1 <= height <= MAX_RESOLUTION):
                raise ValueError(f"resolution capped at {MAX_RESOLUTION}x{MAX_RESOLUTION}")
            if not (1 <= iters <= MAX_ORBIT_ITERS):
                raise ValueError(f"iters must be in [1, {MAX_ORBIT_ITERS}]")
            if match_tol <= 0:
                raise ValueError("match_tol must be positive")
            if not (1 <= max_period <= 16):
                raise ValueError("max_period must be in [1, 16]")
            if not (1 <= threads <= 64):
                raise ValueError("threads must be in [1, 64]")
        except ValueError as exc:
            raise _BadRequest(str(exc))

        def work():
            table = build_attractor_table(conic, line, region, max_period)
            grid = render_basins(
                conic, line, table, region, width, height,
                iters=iters, match_tol=match_tol, threads=threads,
            )
            return table, grid

        try:
            table, grid = run_pooled(work)
        except EmptyTable:
            gap = set_distance(conic, line)
            return _json_response({"reason": "infeasible configuration", "gap": gap}, status=422)

        if fmt == "ppm":
            body = encode_ppm(grid, default_palette(len(table)))
            media = "image/x-portable-pixmap"
        else:
            doc = grid_to_json(grid, table)
            doc["palette"] = default_palette(len(table))
            body = jsonout.dumps(doc)
            media = "application/json"
        cache.put(key, (body, media))
        return Response(content=body, media_type=media)

    @app.get("/api/orbit")
    def orbit(request: Request):
        params = dict(request.query_params)
        key = ("orbit", tuple(sorted(params.items())))
        hit = cache.get(key)
        if hit is not None:
            return Response(content=hit, media_type="application/json")
        conic, line = parse_pair(params)
        try:
            x = float(_param(params, "x", required=True))
            y = float(_param(params, "y", required=True))
            iters = int(_param(params, "iters", default="1000"))
            bailout = float(_param(params, "bailout", default="1e6"))
            if not (1 <= iters <= MAX_ORBIT_ITERS):
                raise ValueError(f"iters must be in [1, {MAX_ORBIT_ITERS}]")
            if not (1.0 <= bailout <= 1e9):
                raise ValueError("bailout must be in [1, 1e9]")
        except ValueError as exc:
            raise _BadRequest(str(exc))
        start = np.array([x, y])

        def work():
            orb = dr_iterate(conic, line, start, DRConfig(max_iter=iters, divergence_bailout=bailout))
            doc = orbit_to_json(conic, line, start, orb)
            feas = feasible_points(conic, line)
            if feas:
                nearest = min(feas, key=lambda f: float(np.linalg.norm(orb.final - f)))
                try:
                    cert = local_convergence_certificate(conic, line, nearest)
                    doc["certificate"] = {
                        "feasible_point": cert.feasible_point,
                        "eigen_modulus_sq": cert.eigen_modulus_sq,
                        "locally_convergent": cert.locally_convergent,
                    }
                except DrplaneError:
                    pass
            else:
                try:
                    cert = separating_functional(conic, line)
                    doc["divergence"] = {"gap": cert.gap}
                except (NotSeparable, DrplaneError):
                    pass
            return jsonout.dumps(doc)

        body = run_pooled(work)
        cache.put(key, body)
        return Response(content=body, media_type="application/json")

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


app = create_app()
