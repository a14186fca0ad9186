export type SetKind = "ellipse" | "psphere" | "circle";

export interface RegionBox {
    xmin: number;
    xmax: number;
    ymin: number;
    ymax: number;
}

export interface Attractor {
    label: number;
    kind: "feasible" | "periodic";
    period: number;
    point: [number, number];
    cycle: [number, number][];
}

export interface BasinsResponse {
    schema: number;
    width: number;
    height: number;
    iterations: number;
    region: RegionBox;
    attractors: Attractor[];
    labels: number[];
    palette: [number, number, number][];
}

export interface OrbitResponse {
    schema: number;
    start: [number, number];
    terminated: "Converged" | "MaxIter" | "Diverged";
    points: [number, number][];
    step_norms: number[];
    certificate?: {
        feasible_point: [number, number];
        eigen_modulus_sq: number;
        locally_convergent: boolean;
    };
    divergence?: { gap: number };
}

export interface ExplorerParams {
    kind: SetKind;
    param: number;          // b for the ellipse, p for the p-sphere
    slope: number;
    intercept: number;
    region: RegionBox;
}

export type BasinsResult =
    | { ok: true; data: BasinsResponse }
    | { ok: false; status: number; reason: string; gap?: number };

export interface ApiClient {
    fetchBasins(params: ExplorerParams, res: number, matchTol: number): Promise<BasinsResult>;
    fetchOrbit(params: ExplorerParams, x: number, y: number, iters: number): Promise<OrbitResponse>;
}
