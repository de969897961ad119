/**
 * Figure assembly from parsed harness outputs: mean +/- standard error
 * curves per scheme for sweeps, per-trace convergence curves, and the
 * component-count histogram of the connectivity diagnostic.
 */

import {
  ConnectivityRow,
  SchemaMismatch,
  SweepRow,
  TraceEntry,
} from "./schema.js";
import { PALETTE, Series, SvgCanvas } from "./svg.js";

export type FigureKind = "sweep" | "antennas" | "convergence" | "connectivity";

function metricLabel(caseName: string): string {
  if (caseName === "mec") return "total latency (s)";
  if (caseName === "rzf") return "sum rate (bits/s/Hz)";
  return "capacity (bits/s/Hz)";
}

export function renderSweep(rows: SweepRow[], kind: "sweep" | "antennas"): string {
  if (rows.length === 0) {
    throw new SchemaMismatch("scheme", "no sweep rows to plot");
  }
  const expectedParam = kind === "sweep" ? "panel" : "antennas";
  for (const row of rows) {
    if (row.param !== expectedParam) {
      throw new SchemaMismatch(
        "param",
        `figure kind '${kind}' needs param '${expectedParam}', found '${row.param}'`,
      );
    }
  }
  const schemes = [...new Set(rows.map((r) => r.scheme))];
  const series: Series[] = schemes.map((scheme) => {
    const mine = rows
      .filter((r) => r.scheme === scheme)
      .sort((a, b) => a.value - b.value);
    return {
      label: scheme,
      x: mine.map((r) => r.value),
      y: mine.map((r) => r.metric_mean),
      err: mine.map((r) => r.metric_stderr),
    };
  });
  const xLabel = kind === "sweep"
    ? "panel side (wavelengths)"
    : "antennas per side";
  const canvas = new SvgCanvas({
    title: `${rows[0].case}: mean metric vs ${expectedParam}`,
    xLabel,
    yLabel: metricLabel(rows[0].case),
  });
  const allX = series.flatMap((s) => s.x);
  const allY = series.flatMap((s) =>
    s.y.flatMap((y, i) => [y - (s.err?.[i] ?? 0), y + (s.err?.[i] ?? 0)]));
  canvas.setRanges(allX, allY);
  canvas.axes();
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    canvas.errorBars(s, color);
    canvas.polyline(s, color);
  });
  canvas.legend(series.map((s) => s.label));
  return canvas.render();
}

export interface NamedTrace {
  name: string;
  entries: TraceEntry[];
}

export function renderConvergence(traces: NamedTrace[]): string {
  if (traces.length === 0) {
    throw new SchemaMismatch("outer", "no trace files to plot");
  }
  const series: Series[] = traces.map((t) => ({
    label: t.name,
    x: t.entries.map((e) => e.outer),
    y: t.entries.map((e) => e.f_raw),
  }));
  const canvas = new SvgCanvas({
    title: "objective vs outer iteration",
    xLabel: "outer iteration",
    yLabel: "objective",
  });
  canvas.setRanges(series.flatMap((s) => s.x), series.flatMap((s) => s.y));
  canvas.axes();
  series.forEach((s, i) => canvas.polyline(s, PALETTE[i % PALETTE.length]));
  canvas.legend(series.map((s) => s.label));
  return canvas.render();
}

export function renderConnectivity(rows: ConnectivityRow[]): string {
  if (rows.length === 0) {
    throw new SchemaMismatch("components", "no connectivity rows to plot");
  }
  const counts = new Map<number, number>();
  for (const row of rows) {
    counts.set(row.components, (counts.get(row.components) ?? 0) + 1);
  }
  const values = [...counts.keys()].sort((a, b) => a - b);
  const canvas = new SvgCanvas({
    title: `feasible-region components over ${rows.length} trials`,
    xLabel: "connected components",
    yLabel: "trials",
  });
  canvas.setRanges(
    [Math.min(...values) - 0.5, Math.max(...values) + 1.5],
    [0, Math.max(...counts.values())],
  );
  canvas.axes();
  for (const v of values) {
    const color = v >= 2 ? PALETTE[1] : PALETTE[0];
    canvas.bar(v, v + 1, counts.get(v) ?? 0, color);
  }
  canvas.legend(["1 component", ">= 2 components"]);
  return canvas.render();
}
