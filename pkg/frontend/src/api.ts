import type { ApiClient, BasinsResult, ExplorerParams, OrbitResponse } from "./types.js";

function setSpec(p: ExplorerParams): string {
    if (p.kind === "circle") return "circle";
    if (p.kind === "ellipse") return `ellipse:b=${p.param}`;
    return `psphere:p=${p.param}`;
}

function lineSpec(p: ExplorerParams): string {
    return p.intercept === 0 ? `slope=${p.slope}` : `slope=${p.slope},intercept=${p.intercept}`;
}

function regionSpec(p: ExplorerParams): string {
    const r = p.region;
    return `${r.xmin}:${r.xmax}:${r.ymin}:${r.ymax}`;
}

export function createClient(baseUrl = ""): ApiClient {
    return {
        async fetchBasins(params, res, matchTol): Promise<BasinsResult> {
            const qs = new URLSearchParams({
                set: setSpec(params),
                line: lineSpec(params),
                region: regionSpec(params),
                res: `${res}x${res}`,
                iters: "1000",
                match_tol: String(matchTol),
                max_period: "6",
            });
            const r = await fetch(`${baseUrl}/api/basins?${qs.toString()}`);
            if (r.ok) {
                return { ok: true, data: await r.json() };
            }
            const body = await r.json().catch(() => ({}));
            return {
                ok: false,
                status: r.status,
                reason: body.reason ?? r.statusText,
                gap: body.gap,
            };
        },

        async fetchOrbit(params, x, y, iters): Promise<OrbitResponse> {
            const qs = new URLSearchParams({
                set: setSpec(params),
                line: lineSpec(params),
                x: String(x),
                y: String(y),
                iters: String(iters),
            });
            const r = await fetch(`${baseUrl}/api/orbit?${qs.toString()}`);
            if (!r.ok) {
                const body = await r.json().catch(() => ({}));
                throw new Error(body.reason ?? `orbit request failed (${r.status})`);
            }
            return r.json();
        },
    };
}
