/**
 * Minimal deterministic SVG builder: fixed canvas, fixed palette, no
 * randomness, so identical inputs give byte-identical images.
 */

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { left: 64, right: 20, top: 28, bottom: 46 };

export const PALETTE = [
  "#1f6fb2", "#d1495b", "#3a7d44", "#8e6c8a", "#c98a2b", "#4f6d7a",
];

export interface Series {
  label: string;
  x: number[];
  y: number[];
  /** Optional symmetric error bar half-heights, same length as y. */
  err?: number[];
}

export interface AxisSpec {
  title: string;
  xLabel: string;
  yLabel: string;
}

interface Range {
  min: number;
  max: number;
}

function rangeOf(values: number[]): Range {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (!Number.isFinite(min)) {
    min = 0;
    max = 1;
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const pad = 0.06 * (max - min);
  return { min: min - pad, max: max + pad };
}

function ticks(r: Range, count = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i < count; i++) {
    out.push(r.min + (i * (r.max - r.min)) / (count - 1));
  }
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1);
  return Number(v.toPrecision(3)).toString();
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export class SvgCanvas {
  private parts: string[] = [];
  private xr: Range = { min: 0, max: 1 };
  private yr: Range = { min: 0, max: 1 };

  constructor(private spec: AxisSpec) {}

  setRanges(xs: number[], ys: number[]): void {
    this.xr = rangeOf(xs);
    this.yr = rangeOf(ys);
  }

  sx(x: number): number {
    const w = WIDTH - MARGIN.left - MARGIN.right;
    return MARGIN.left + ((x - this.xr.min) / (this.xr.max - this.xr.min)) * w;
  }

  sy(y: number): number {
    const h = HEIGHT - MARGIN.top - MARGIN.bottom;
    return HEIGHT - MARGIN.bottom - ((y - this.yr.min) / (this.yr.max - this.yr.min)) * h;
  }

  private put(fragment: string): void {
    this.parts.push(fragment);
  }

  axes(): void {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    this.put(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#444" stroke-width="1"/>`);
    for (const t of ticks(this.xr)) {
      const px = this.sx(t).toFixed(1);
      this.put(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="#444"/>`);
      this.put(`<text x="${px}" y="${y0 + 18}" font-size="11" text-anchor="middle" fill="#222">${fmt(t)}</text>`);
    }
    for (const t of ticks(this.yr)) {
      const py = this.sy(t).toFixed(1);
      this.put(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#444"/>`);
      this.put(`<text x="${x0 - 8}" y="${py}" font-size="11" text-anchor="end" dominant-baseline="middle" fill="#222">${fmt(t)}</text>`);
    }
    this.put(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 10}" font-size="12" text-anchor="middle" fill="#111">${esc(this.spec.xLabel)}</text>`);
    this.put(`<text x="16" y="${(y0 + y1) / 2}" font-size="12" text-anchor="middle" fill="#111" transform="rotate(-90 16 ${(y0 + y1) / 2})">${esc(this.spec.yLabel)}</text>`);
    this.put(`<text x="${(x0 + x1) / 2}" y="${MARGIN.top - 10}" font-size="13" text-anchor="middle" fill="#111">${esc(this.spec.title)}</text>`);
  }

  polyline(series: Series, color: string): void {
    const pts = series.x
      .map((x, i) => `${this.sx(x).toFixed(1)},${this.sy(series.y[i]).toFixed(1)}`)
      .join(" ");
    this.put(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.8" class="curve"/>`);
    series.x.forEach((x, i) => {
      this.put(`<circle cx="${this.sx(x).toFixed(1)}" cy="${this.sy(series.y[i]).toFixed(1)}" r="2.6" fill="${color}"/>`);
    });
  }

  errorBars(series: Series, color: string): void {
    if (!series.err) return;
    series.x.forEach((x, i) => {
      const e = series.err ? series.err[i] : 0;
      const px = this.sx(x).toFixed(1);
      const top = this.sy(series.y[i] + e).toFixed(1);
      const bot = this.sy(series.y[i] - e).toFixed(1);
      this.put(`<line x1="${px}" y1="${top}" x2="${px}" y2="${bot}" stroke="${color}" stroke-width="1.2" class="errbar"/>`);
      const pxl = (this.sx(x) - 4).toFixed(1);
      const pxr = (this.sx(x) + 4).toFixed(1);
      this.put(`<line x1="${pxl}" y1="${top}" x2="${pxr}" y2="${top}" stroke="${color}" stroke-width="1.2" class="errcap"/>`);
      this.put(`<line x1="${pxl}" y1="${bot}" x2="${pxr}" y2="${bot}" stroke="${color}" stroke-width="1.2" class="errcap"/>`);
    });
  }

  bar(x0: number, x1: number, height: number, color: string): void {
    const left = this.sx(x0);
    const width = Math.max(1, this.sx(x1) - left - 2);
    const top = this.sy(height);
    const base = this.sy(Math.max(this.yr.min, 0));
    this.put(`<rect x="${left.toFixed(1)}" y="${top.toFixed(1)}" width="${width.toFixed(1)}" height="${Math.max(0, base - top).toFixed(1)}" fill="${color}" class="bin"/>`);
  }

  legend(labels: string[]): void {
    labels.forEach((label, i) => {
      const y = MARGIN.top + 14 + 16 * i;
      const x = WIDTH - MARGIN.right - 150;
      const color = PALETTE[i % PALETTE.length];
      this.put(`<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${color}" stroke-width="2"/>`);
      this.put(`<text x="${x + 28}" y="${y}" font-size="11" fill="#111">${esc(label)}</text>`);
    });
  }

  render(): string {
    return [
      `<?xml version="1.0" encoding="UTF-8"?>`,
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      ...this.parts,
      `</svg>`,
      ``,
    ].join("\n");
  }
}
