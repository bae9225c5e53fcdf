/**
 * Minimal deterministic SVG chart primitives: linear axes, polyline
 * traces, legends, and a panel grid. Pure string building with fixed
 * number formatting, so identical inputs yield byte-identical files.
 */

export interface Trace {
  label: string;
  xs: number[];
  ys: number[];
  color: string;
  dash?: string;
  width?: number;
}

export interface PanelSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  traces: Trace[];
  /** Force identical x/y unit lengths (trajectory views). */
  equalAspect?: boolean;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const PANEL_W = 460;
const PANEL_H = 300;
const MARGIN = { left: 62, right: 16, top: 34, bottom: 46 };

function fmt(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`non-finite coordinate ${v}`);
  if (v === 0) return "0";
  const out = v.toPrecision(6);
  return out.includes(".") ? out.replace(/\.?0+$/, "").replace(/\.?0+e/, "e") : out;
}

function tickLabel(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1e4 || abs < 1e-3) return v.toExponential(1);
  return parseFloat(v.toPrecision(4)).toString();
}

/** Round-valued ticks covering [min, max], roughly `count` of them. */
export function niceTicks(min: number, max: number, count = 5): number[] {
  if (min === max) {
    const pad = min === 0 ? 1 : Math.abs(min) * 0.5;
    min -= pad;
    max += pad;
  }
  const rawStep = (max - min) / count;
  const power = Math.floor(Math.log10(rawStep));
  const base = Math.pow(10, power);
  let step = base;
  for (const mult of [1, 2, 5, 10]) {
    if (rawStep <= mult * base) {
      step = mult * base;
      break;
    }
  }
  const ticks: number[] = [];
  let t = Math.ceil(min / step) * step;
  for (; t <= max + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

interface Extent {
  min: number;
  max: number;
}

function extent(values: number[], pad = 0.05): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === Infinity) throw new Error("empty trace");
  if (min === max) {
    const delta = min === 0 ? 1 : Math.abs(min) * 0.1;
    return { min: min - delta, max: max + delta };
  }
  const span = max - min;
  return { min: min - pad * span, max: max + pad * span };
}

function renderPanel(spec: PanelSpec, ox: number, oy: number): string {
  const xs = spec.traces.flatMap((tr) => tr.xs);
  const ys = spec.traces.flatMap((tr) => tr.ys);
  let xExt = extent(xs);
  let yExt = extent(ys);
  const plotW = PANEL_W - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;
  if (spec.equalAspect) {
    const xSpan = xExt.max - xExt.min;
    const ySpan = yExt.max - yExt.min;
    const unit = Math.max(xSpan / plotW, ySpan / plotH);
    const grow = (ext: Extent, target: number): Extent => {
      const mid = (ext.min + ext.max) / 2;
      return { min: mid - target / 2, max: mid + target / 2 };
    };
    xExt = grow(xExt, unit * plotW);
    yExt = grow(yExt, unit * plotH);
  }
  const sx = (v: number) => MARGIN.left + ((v - xExt.min) / (xExt.max - xExt.min)) * plotW;
  const sy = (v: number) => PANEL_H - MARGIN.bottom - ((v - yExt.min) / (yExt.max - yExt.min)) * plotH;

  const parts: string[] = [];
  parts.push(`<g transform="translate(${ox},${oy})">`);
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${PANEL_W / 2}" y="${MARGIN.top - 12}" text-anchor="middle" font-size="14" font-weight="bold">${spec.title}</text>`,
  );
  for (const t of niceTicks(xExt.min, xExt.max)) {
    const px = sx(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${PANEL_H - MARGIN.bottom}" x2="${fmt(px)}" y2="${PANEL_H - MARGIN.bottom + 5}" stroke="#333"/>`,
      `<text x="${fmt(px)}" y="${PANEL_H - MARGIN.bottom + 18}" text-anchor="middle" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  for (const t of niceTicks(yExt.min, yExt.max)) {
    const py = sy(t);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${fmt(py)}" x2="${MARGIN.left}" y2="${fmt(py)}" stroke="#333"/>`,
      `<text x="${MARGIN.left - 8}" y="${fmt(py + 4)}" text-anchor="end" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${PANEL_W / 2}" y="${PANEL_H - 8}" text-anchor="middle" font-size="12">${spec.xLabel}</text>`,
    `<text transform="translate(14,${PANEL_H / 2}) rotate(-90)" text-anchor="middle" font-size="12">${spec.yLabel}</text>`,
  );
  for (const tr of spec.traces) {
    if (tr.xs.length !== tr.ys.length) throw new Error(`trace ${tr.label}: x/y length mismatch`);
    const points = tr.xs.map((x, i) => `${fmt(sx(x))},${fmt(sy(tr.ys[i]))}`).join(" ");
    const dash = tr.dash ? ` stroke-dasharray="${tr.dash}"` : "";
    parts.push(
      `<polyline class="trace" fill="none" stroke="${tr.color}" stroke-width="${tr.width ?? 1.5}"${dash} points="${points}"/>`,
    );
  }
  parts.push("</g>");
  return parts.join("\n");
}

function renderLegend(traces: Trace[], width: number): string {
  const seen = new Map<string, Trace>();
  for (const tr of traces) {
    if (!seen.has(tr.label)) seen.set(tr.label, tr);
  }
  const entries = [...seen.values()];
  const itemW = Math.max(90, Math.floor((width - 40) / Math.max(entries.length, 1)));
  const parts = [`<g transform="translate(20,6)">`];
  entries.forEach((tr, i) => {
    const x = i * itemW;
    const dash = tr.dash ? ` stroke-dasharray="${tr.dash}"` : "";
    parts.push(
      `<line x1="${x}" y1="10" x2="${x + 24}" y2="10" stroke="${tr.color}" stroke-width="2"${dash}/>`,
      `<text x="${x + 30}" y="14" font-size="12">${tr.label}</text>`,
    );
  });
  parts.push("</g>");
  return parts.join("\n");
}

/** Assemble panels into a grid with a shared legend strip on top. */
export function renderFigure(panels: PanelSpec[], columns = 2): string {
  const cols = Math.min(columns, panels.length);
  const rows = Math.ceil(panels.length / cols);
  const legendH = 26;
  const width = cols * PANEL_W;
  const height = rows * PANEL_H + legendH;
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    renderLegend(panels.flatMap((p) => p.traces), width),
  ];
  panels.forEach((panel, i) => {
    const ox = (i % cols) * PANEL_W;
    const oy = legendH + Math.floor(i / cols) * PANEL_H;
    parts.push(renderPanel(panel, ox, oy));
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
