import type { BasinsResponse } from "./types.js";
import type { OrbitOverlay } from "./state.js";
import { planeToCanvas } from "./mapping.js";

/** Paint the label grid into a same-sized canvas via its palette. */
export function paintBasins(canvas: HTMLCanvasElement, basins: BasinsResponse): void {
    canvas.width = basins.width;
    canvas.height = basins.height;
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    const img = ctx.createImageData(basins.width, basins.height);
    const { labels, palette } = basins;
    for (let i = 0; i < labels.length; i++) {
        const c = palette[labels[i]] ?? [0, 0, 0];
        img.data[4 * i] = c[0];
        img.data[4 * i + 1] = c[1];
        img.data[4 * i + 2] = c[2];
        img.data[4 * i + 3] = 255;
    }
    ctx.putImageData(img, 0, 0);
}

/** Draw orbit polylines over the basins (optionally every second iterate). */
export function paintOverlays(
    canvas: HTMLCanvasElement,
    basins: BasinsResponse,
    overlays: OrbitOverlay[],
    everySecond: boolean,
): void {
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.lineWidth = Math.max(1, basins.width / 256);
    for (const overlay of overlays) {
        const pts = everySecond
            ? overlay.points.filter((_, i) => i % 2 === 0)
            : overlay.points;
        if (pts.length === 0) continue;
        ctx.strokeStyle = "rgba(255, 255, 255, 0.9)";
        ctx.beginPath();
        const [x0, y0] = planeToCanvas(pts[0][0], pts[0][1], basins.region, basins.width, basins.height);
        ctx.moveTo(x0, y0);
        for (let i = 1; i < pts.length; i++) {
            const [cx, cy] = planeToCanvas(pts[i][0], pts[i][1], basins.region, basins.width, basins.height);
            ctx.lineTo(cx, cy);
        }
        ctx.stroke();
        // start marker
        ctx.fillStyle = "#ffffff";
        ctx.beginPath();
        ctx.arc(x0, y0, ctx.lineWidth * 2, 0, 2 * Math.PI);
        ctx.fill();
    }
}

export function legendHtml(basins: BasinsResponse): string {
    const rows = basins.attractors.map((a) => {
        const c = basins.palette[a.label] ?? [128, 128, 128];
        const what = a.kind === "feasible" ? "feasible" : `period ${a.period}`;
        const pt = `(${a.point[0].toFixed(4)}, ${a.point[1].toFixed(4)})`;
        return (
            `<li><span class="swatch" style="background: rgb(${c[0]},${c[1]},${c[2]})"></span>` +
            `<span class="what">${what}</span> <span class="pt">${pt}</span></li>`
        );
    });
    return rows.join("");
}
