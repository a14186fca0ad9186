import type { RegionBox } from "./types.js";

/**
 * Plane coordinates of a pixel midpoint, row 0 at ymax.
 *
 * Mirrors the renderer's midpoint construction operation-for-operation
 * (step = extent/count first, then base + (i + 0.5) * step), so clicking
 * the center of a pixel seeds the exact x0 the renderer iterated for that
 * pixel.
 */
export function pixelToPlane(
    px: number,
    py: number,
    region: RegionBox,
    width: number,
    height: number,
): [number, number] {
    const stepX = (region.xmax - region.xmin) / width;
    const stepY = (region.ymax - region.ymin) / height;
    return [region.xmin + (px + 0.5) * stepX, region.ymax - (py + 0.5) * stepY];
}

/** Pixel indices containing a plane point (inverse of pixelToPlane). */
export function planeToPixel(
    x: number,
    y: number,
    region: RegionBox,
    width: number,
    height: number,
): [number, number] {
    const stepX = (region.xmax - region.xmin) / width;
    const stepY = (region.ymax - region.ymin) / height;
    const px = Math.min(width - 1, Math.max(0, Math.floor((x - region.xmin) / stepX)));
    const py = Math.min(height - 1, Math.max(0, Math.floor((region.ymax - y) / stepY)));
    return [px, py];
}

/** Fractional canvas position of a plane point (for polyline overlays). */
export function planeToCanvas(
    x: number,
    y: number,
    region: RegionBox,
    width: number,
    height: number,
): [number, number] {
    const fx = ((x - region.xmin) / (region.xmax - region.xmin)) * width;
    const fy = ((region.ymax - y) / (region.ymax - region.ymin)) * height;
    return [fx, fy];
}
