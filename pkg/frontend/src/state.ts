import type {
    ApiClient,
    Attractor,
    BasinsResponse,
    ExplorerParams,
    RegionBox,
} from "./types.js";
import { pixelToPlane } from "./mapping.js";

export const SLIDER_BOUNDS = {
    b: { min: 1, max: 16 },
    p: { min: 0.25, max: 8 },
    slope: { min: -16, max: 16 },
    intercept: { min: -4, max: 4 },
} as const;

const MAX_EXTENT = 64;
const MIN_SPAN = 1e-3;

export interface AppliedView {
    hash: number;
    params: ExplorerParams;
    basins: BasinsResponse;
    resolution: number;
}

export interface OrbitOverlay {
    hash: number;
    start: [number, number];
    points: [number, number][];
    terminated: string;
}

export interface StoreOptions {
    debounceMs?: number;
    previewRes?: number;
    fullRes?: number;
    matchTol?: number;
    orbitIters?: number;
}

function clamp(v: number, lo: number, hi: number): number {
    return Math.min(hi, Math.max(lo, v));
}

export function clampParam(kind: ExplorerParams["kind"], value: number): number {
    const b = kind === "ellipse" ? SLIDER_BOUNDS.b : SLIDER_BOUNDS.p;
    return clamp(value, b.min, b.max);
}

export function clampRegion(region: RegionBox): RegionBox {
    let { xmin, xmax, ymin, ymax } = region;
    xmin = clamp(xmin, -MAX_EXTENT, MAX_EXTENT);
    xmax = clamp(xmax, -MAX_EXTENT, MAX_EXTENT);
    ymin = clamp(ymin, -MAX_EXTENT, MAX_EXTENT);
    ymax = clamp(ymax, -MAX_EXTENT, MAX_EXTENT);
    if (xmax - xmin < MIN_SPAN) {
        const cx = (xmin + xmax) / 2;
        xmin = cx - MIN_SPAN / 2;
        xmax = cx + MIN_SPAN / 2;
    }
    if (ymax - ymin < MIN_SPAN) {
        const cy = (ymin + ymax) / 2;
        ymin = cy - MIN_SPAN / 2;
        ymax = cy + MIN_SPAN / 2;
    }
    return { xmin, xmax, ymin, ymax };
}

/** Periods present in `after` but absent from `before` (the legend delta). */
export function addedPeriods(before: Attractor[] | null, after: Attractor[]): number[] {
    const had = new Set((before ?? []).map((a) => a.period));
    const out = new Set<number>();
    for (const a of after) {
        if (!had.has(a.period)) out.add(a.period);
    }
    return [...out].sort((a, b) => a - b);
}

/** Min distance between any of the tail points and any cycle point. */
export function cycleDistance(tail: [number, number][], cycle: [number, number][]): number {
    let best = Infinity;
    for (const [tx, ty] of tail) {
        for (const [cx, cy] of cycle) {
            best = Math.min(best, Math.hypot(tx - cx, ty - cy));
        }
    }
    return best;
}

/**
 * Explorer state with parameter-hash versioning.
 *
 * Every parameter change bumps the hash and clears orbit overlays; render
 * requests carry the hash they were issued under and responses for a
 * superseded hash are discarded, so the displayed image and legend always
 * belong to the current parameters and update atomically (one notify per
 * applied response).  Scrubbing renders at the preview resolution after a
 * debounce; releasing the control requests the full resolution.
 */
export class ExplorerStore {
    readonly debounceMs: number;
    readonly previewRes: number;
    readonly fullRes: number;
    readonly matchTol: number;
    readonly orbitIters: number;

    params: ExplorerParams;
    view: AppliedView | null = null;
    overlays: OrbitOverlay[] = [];
    divergenceGap: number | null = null;
    lastError: string | null = null;
    everySecondIterate = true;

    /** Number of responses actually applied to the view (test hook). */
    appliedRenderCount = 0;
    /** Number of responses discarded as stale (test hook). */
    staleResponseCount = 0;

    private client: ApiClient;
    private hash = 0;
    private timer: ReturnType<typeof setTimeout> | null = null;
    private listeners: Array<() => void> = [];

    constructor(client: ApiClient, opts: StoreOptions = {}) {
        this.client = client;
        this.debounceMs = opts.debounceMs ?? 150;
        this.previewRes = opts.previewRes ?? 128;
        this.fullRes = opts.fullRes ?? 512;
        this.matchTol = opts.matchTol ?? 1e-3;
        this.orbitIters = opts.orbitIters ?? 1000;
        this.params = {
            kind: "ellipse",
            param: 2,
            slope: 2,
            intercept: 0,
            region: { xmin: -3, xmax: 3, ymin: -3, ymax: 3 },
        };
    }

    get currentHash(): number {
        return this.hash;
    }

    subscribe(fn: () => void): () => void {
        this.listeners.push(fn);
        return () => {
            this.listeners = this.listeners.filter((f) => f !== fn);
        };
    }

    private emit(): void {
        for (const fn of this.listeners) fn();
    }

    private bump(): void {
        this.hash += 1;
        this.overlays = [];
        this.divergenceGap = null;
        this.lastError = null;
    }

    setKind(kind: ExplorerParams["kind"]): void {
        if (kind === this.params.kind) return;
        const param = kind === "circle" ? 2 : clampParam(kind, this.params.param);
        this.params = { ...this.params, kind, param };
        this.bump();
        this.schedule(this.previewRes);
        this.emit();
    }

    setParameter(field: "param" | "slope" | "intercept", value: number, scrub = true): void {
        let v = value;
        if (field === "param") v = clampParam(this.params.kind, value);
        if (field === "slope") v = clamp(value, SLIDER_BOUNDS.slope.min, SLIDER_BOUNDS.slope.max);
        if (field === "intercept")
            v = clamp(value, SLIDER_BOUNDS.intercept.min, SLIDER_BOUNDS.intercept.max);
        if (v === this.params[field]) return; // clamped to no change: no request
        this.params = { ...this.params, [field]: v };
        this.bump();
        this.schedule(scrub ? this.previewRes : this.fullRes);
        this.emit();
    }

    setRegion(region: RegionBox): void {
        const r = clampRegion(region);
        const cur = this.params.region;
        if (
            r.xmin === cur.xmin &&
            r.xmax === cur.xmax &&
            r.ymin === cur.ymin &&
            r.ymax === cur.ymax
        ) {
            return; // over-zoom clamped back to the same region: no request
        }
        this.params = { ...this.params, region: r };
        this.bump();
        this.schedule(this.previewRes);
        this.emit();
    }

    /** Pointer released: render the current parameters at full resolution. */
    release(): void {
        if (this.timer !== null) {
            clearTimeout(this.timer);
            this.timer = null;
        }
        if (this.view && this.view.hash === this.hash && this.view.resolution === this.fullRes) {
            return; // already showing the full-resolution image for these parameters
        }
        void this.issueRender(this.fullRes);
    }

    /** Request the first render (startup). */
    refresh(): void {
        void this.issueRender(this.fullRes);
    }

    private schedule(res: number): void {
        if (this.timer !== null) clearTimeout(this.timer);
        this.timer = setTimeout(() => {
            this.timer = null;
            void this.issueRender(res);
        }, this.debounceMs);
    }

    async issueRender(res: number): Promise<void> {
        const h = this.hash;
        let result;
        try {
            result = await this.client.fetchBasins(this.params, res, this.matchTol);
        } catch (err) {
            if (h === this.hash) {
                this.lastError = String(err);
                this.emit();
            }
            return;
        }
        if (h !== this.hash) {
            this.staleResponseCount += 1; // superseded while in flight: discard
            return;
        }
        if (result.ok) {
            // legend and canvas update atomically: a single state swap + notify
            this.view = { hash: h, params: this.params, basins: result.data, resolution: res };
            this.appliedRenderCount += 1;
            this.divergenceGap = null;
            this.lastError = null;
        } else if (result.status === 422) {
            this.view = null;
            this.divergenceGap = result.gap ?? null;
        } else {
            this.lastError = result.reason;
        }
        this.emit();
    }

    /** Click handler: seed an orbit at the midpoint of the clicked pixel. */
    async seedOrbitAtPixel(px: number, py: number): Promise<OrbitOverlay | null> {
        if (!this.view) return null;
        const { basins } = this.view;
        if (px < 0 || py < 0 || px >= basins.width || py >= basins.height) return null;
        const [x, y] = pixelToPlane(px, py, basins.region, basins.width, basins.height);
        const h = this.hash;
        let orbit;
        try {
            orbit = await this.client.fetchOrbit(this.params, x, y, this.orbitIters);
        } catch (err) {
            if (h === this.hash) {
                this.lastError = `orbit fetch failed: ${err}`;
                this.emit();
            }
            return null;
        }
        if (h !== this.hash) {
            this.staleResponseCount += 1;
            return null; // parameters changed while fetching: drop the overlay
        }
        const overlay: OrbitOverlay = {
            hash: h,
            start: [x, y],
            points: orbit.points,
            terminated: orbit.terminated,
        };
        this.overlays.push(overlay);
        this.emit();
        return overlay;
    }
}
