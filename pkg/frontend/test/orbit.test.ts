import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { ExplorerStore, cycleDistance } from "../src/state.js";
import { pixelToPlane } from "../src/mapping.js";
import type { ApiClient, BasinsResponse, OrbitResponse } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

function fixture<T>(name: string): T {
    return JSON.parse(readFileSync(join(here, "fixtures", name), "utf8")) as T;
}

const BASINS = fixture<BasinsResponse>("basins_b2.json");
const ORBIT = fixture<OrbitResponse & { _pixel: { px: number; py: number; label: number } }>(
    "orbit_b2.json",
);
const MATCH_TOL = 1e-3;

function clientFor(orbit: OrbitResponse, seen: Array<[number, number]>): ApiClient {
    return {
        fetchBasins: () => Promise.resolve({ ok: true, data: BASINS }),
        fetchOrbit: (_params, x, y) => {
            seen.push([x, y]);
            return Promise.resolve(orbit);
        },
    };
}

describe("orbit overlay seeded from a classified pixel", () => {
    it("requests the pixel midpoint the renderer used and the final cycle " +
        "lies within 2x match tolerance of that pixel's attractor", async () => {
        const { px, py, label } = ORBIT._pixel;
        expect(BASINS.labels[py * BASINS.width + px]).toBe(label);

        const seen: Array<[number, number]> = [];
        const store = new ExplorerStore(clientFor(ORBIT, seen), { debounceMs: 10 });
        await store.issueRender(store.fullRes);
        const overlay = await store.seedOrbitAtPixel(px, py);
        expect(overlay).not.toBeNull();

        // exact midpoint handed to the orbit endpoint (captured fixture used it)
        const [wantX, wantY] = pixelToPlane(px, py, BASINS.region, BASINS.width, BASINS.height);
        expect(seen[0][0]).toBe(wantX);
        expect(seen[0][1]).toBe(wantY);
        expect(overlay!.start).toEqual([wantX, wantY]);

        // the orbit's final cycle matches the labeled attractor within 2x tol
        const entry = BASINS.attractors.find((a) => a.label === label)!;
        const tail = overlay!.points.slice(-entry.period);
        expect(cycleDistance(tail, entry.cycle)).toBeLessThanOrEqual(2 * MATCH_TOL);

        // and it is far from every other attractor's cycle
        for (const other of BASINS.attractors) {
            if (other.label === label) continue;
            expect(cycleDistance(tail, other.cycle)).toBeGreaterThan(2 * MATCH_TOL);
        }
    });

    it("every classified pixel of the fixture maps back into the viewport", () => {
        for (let py = 0; py < BASINS.height; py += 7) {
            for (let px = 0; px < BASINS.width; px += 7) {
                const [x, y] = pixelToPlane(px, py, BASINS.region, BASINS.width, BASINS.height);
                expect(x).toBeGreaterThan(BASINS.region.xmin);
                expect(x).toBeLessThan(BASINS.region.xmax);
                expect(y).toBeGreaterThan(BASINS.region.ymin);
                expect(y).toBeLessThan(BASINS.region.ymax);
            }
        }
    });

    it("ignores clicks outside the viewport", async () => {
        const seen: Array<[number, number]> = [];
        const store = new ExplorerStore(clientFor(ORBIT, seen), { debounceMs: 10 });
        await store.issueRender(store.fullRes);
        expect(await store.seedOrbitAtPixel(-1, 5)).toBeNull();
        expect(await store.seedOrbitAtPixel(5, BASINS.height)).toBeNull();
        expect(seen.length).toBe(0);
    });

    it("drops the overlay when parameters change mid-fetch", async () => {
        let release: (o: OrbitResponse) => void = () => {};
        const client: ApiClient = {
            fetchBasins: () => Promise.resolve({ ok: true, data: BASINS }),
            fetchOrbit: () => new Promise((resolve) => (release = resolve)),
        };
        const store = new ExplorerStore(client, { debounceMs: 10 });
        await store.issueRender(store.fullRes);
        const promise = store.seedOrbitAtPixel(3, 3);
        store.setParameter("slope", 2.5, true); // supersedes the hash
        release(ORBIT);
        expect(await promise).toBeNull();
        expect(store.overlays.length).toBe(0);
    });

    it("reports a non-blocking notice when the orbit fetch fails", async () => {
        const client: ApiClient = {
            fetchBasins: () => Promise.resolve({ ok: true, data: BASINS }),
            fetchOrbit: () => Promise.reject(new Error("connection refused")),
        };
        const store = new ExplorerStore(client, { debounceMs: 10 });
        await store.issueRender(store.fullRes);
        expect(await store.seedOrbitAtPixel(3, 3)).toBeNull();
        expect(store.lastError).toContain("orbit fetch failed");
        expect(store.view).not.toBeNull(); // the basins view survives
    });
});
