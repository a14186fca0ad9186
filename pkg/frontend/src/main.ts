import { createClient } from "./api.js";
import { ExplorerStore, SLIDER_BOUNDS } from "./state.js";
import { legendHtml, paintBasins, paintOverlays } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

const store = new ExplorerStore(createClient(""), {
    debounceMs: 150,
    previewRes: 128,
    fullRes: 512,
});

const canvas = el<HTMLCanvasElement>("basins");
const legend = el<HTMLUListElement>("legend");
const status = el<HTMLDivElement>("status");
const banner = el<HTMLDivElement>("divergence");

const kindSel = el<HTMLSelectElement>("kind");
const paramSlider = el<HTMLInputElement>("param");
const paramLabel = el<HTMLSpanElement>("param-label");
const paramValue = el<HTMLSpanElement>("param-value");
const slopeSlider = el<HTMLInputElement>("slope");
const slopeValue = el<HTMLSpanElement>("slope-value");
const interceptSlider = el<HTMLInputElement>("intercept");
const interceptValue = el<HTMLSpanElement>("intercept-value");
const everySecond = el<HTMLInputElement>("every-second");
const clearOrbits = el<HTMLButtonElement>("clear-orbits");

function syncParamSlider(): void {
    const kind = store.params.kind;
    const bounds = kind === "ellipse" ? SLIDER_BOUNDS.b : SLIDER_BOUNDS.p;
    paramSlider.min = String(bounds.min);
    paramSlider.max = String(bounds.max);
    paramSlider.step = kind === "ellipse" ? "0.25" : "0.05";
    paramSlider.value = String(store.params.param);
    paramSlider.disabled = kind === "circle";
    paramLabel.textContent = kind === "ellipse" ? "semi-axis b" : "exponent p";
    paramValue.textContent = String(store.params.param);
    slopeValue.textContent = String(store.params.slope);
    interceptValue.textContent = String(store.params.intercept);
}

function redraw(): void {
    if (store.divergenceGap !== null) {
        banner.hidden = false;
        banner.textContent =
            `infeasible configuration: the sets are separated by a gap of ` +
            `${store.divergenceGap.toFixed(6)}; every orbit marches to infinity ` +
            `with at least that step size`;
    } else {
        banner.hidden = true;
    }
    if (store.view) {
        paintBasins(canvas, store.view.basins);
        paintOverlays(canvas, store.view.basins, store.overlays, store.everySecondIterate);
        legend.innerHTML = legendHtml(store.view.basins);
        status.textContent =
            `${store.view.resolution}×${store.view.resolution} render, ` +
            `${store.view.basins.attractors.length} attractors, hash ${store.view.hash}`;
    } else {
        legend.innerHTML = "";
        status.textContent = store.lastError ? `error: ${store.lastError}` : "…";
    }
    syncParamSlider();
}

store.subscribe(redraw);

kindSel.addEventListener("change", () => {
    store.setKind(kindSel.value as "ellipse" | "psphere" | "circle");
});
paramSlider.addEventListener("input", () => {
    store.setParameter("param", Number(paramSlider.value), true);
});
paramSlider.addEventListener("change", () => store.release());
slopeSlider.addEventListener("input", () => {
    store.setParameter("slope", Number(slopeSlider.value), true);
});
slopeSlider.addEventListener("change", () => store.release());
interceptSlider.addEventListener("input", () => {
    store.setParameter("intercept", Number(interceptSlider.value), true);
});
interceptSlider.addEventListener("change", () => store.release());
everySecond.addEventListener("change", () => {
    store.everySecondIterate = everySecond.checked;
    redraw();
});
clearOrbits.addEventListener("click", () => {
    store.overlays = [];
    redraw();
});

canvas.addEventListener("click", (ev) => {
    if (!store.view) return;
    const rect = canvas.getBoundingClientRect();
    const b = store.view.basins;
    const fx = ((ev.clientX - rect.left) / rect.width) * b.width;
    const fy = ((ev.clientY - rect.top) / rect.height) * b.height;
    const px = Math.min(b.width - 1, Math.max(0, Math.floor(fx)));
    const py = Math.min(b.height - 1, Math.max(0, Math.floor(fy)));
    void store.seedOrbitAtPixel(px, py);
});

// wheel zoom centred on the cursor
canvas.addEventListener("wheel", (ev) => {
    if (!store.view) return;
    ev.preventDefault();
    const rect = canvas.getBoundingClientRect();
    const b = store.view.basins;
    const fx = ((ev.clientX - rect.left) / rect.width) * b.width;
    const fy = ((ev.clientY - rect.top) / rect.height) * b.height;
    const r = store.params.region;
    const cx = r.xmin + (fx / b.width) * (r.xmax - r.xmin);
    const cy = r.ymax - (fy / b.height) * (r.ymax - r.ymin);
    const factor = ev.deltaY > 0 ? 1.25 : 0.8;
    store.setRegion({
        xmin: cx + (r.xmin - cx) * factor,
        xmax: cx + (r.xmax - cx) * factor,
        ymin: cy + (r.ymin - cy) * factor,
        ymax: cy + (r.ymax - cy) * factor,
    });
});

syncParamSlider();
store.refresh();
