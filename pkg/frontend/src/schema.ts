/**
 * Parsers for the harness output schemas.
 *
 * The harness writes plain comma-separated files whose fields never contain
 * commas or quotes, so splitting on "," is exact. Any header or cell that
 * does not match the published schema raises SchemaMismatch naming the
 * offending column.
 */

export class SchemaMismatch extends Error {
  readonly column: string;

  constructor(column: string, detail: string) {
    super(`schema mismatch in column '${column}': ${detail}`);
    this.column = column;
  }
}

export const TRIAL_COLUMNS = [
  "trial", "seed", "case", "scheme", "A_lambda", "N", "M", "metric",
  "iters", "rho_final", "resid", "min_dist", "t_ms",
] as const;

export const SWEEP_COLUMNS = [
  "case", "scheme", "param", "value", "trials", "metric_mean",
  "metric_stderr", "feasible_rate",
] as const;

export const CONNECTIVITY_COLUMNS = [
  "trial", "seed", "A_lambda", "M", "resolution", "sweeps", "components",
  "split",
] as const;

export const TRACE_KEYS = [
  "outer", "rho", "f_pen", "f_raw", "resid", "t_ms",
] as const;

export interface SweepRow {
  case: string;
  scheme: string;
  param: string;
  value: number;
  trials: number;
  metric_mean: number;
  metric_stderr: number;
  feasible_rate: number;
}

export interface TrialRow {
  trial: number;
  seed: number;
  case: string;
  scheme: string;
  A_lambda: number;
  N: number;
  M: number;
  metric: number;
  iters: number;
  rho_final: number;
  resid: number;
  min_dist: number;
  t_ms: number;
}

export interface ConnectivityRow {
  trial: number;
  seed: number;
  A_lambda: number;
  M: number;
  resolution: number;
  sweeps: number;
  components: number;
  split: number;
}

export interface TraceEntry {
  outer: number;
  rho: number;
  f_pen: number;
  f_raw: number;
  resid: number;
  t_ms: number;
}

const STRING_COLUMNS = new Set(["case", "scheme", "param"]);

function splitCsv(text: string): string[][] {
  return text
    .split("\n")
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

function checkHeader(header: string[], expected: readonly string[]): void {
  const n = Math.max(header.length, expected.length);
  for (let i = 0; i < n; i++) {
    if (header[i] !== expected[i]) {
      const column = expected[i] ?? header[i];
      throw new SchemaMismatch(
        column,
        expected[i] === undefined
          ? `unexpected extra column '${header[i]}'`
          : `expected '${expected[i]}' at position ${i}, found '${header[i] ?? "<missing>"}'`,
      );
    }
  }
}

function parseTable(
  text: string,
  expected: readonly string[],
): Record<string, string | number>[] {
  const lines = splitCsv(text);
  if (lines.length === 0) {
    throw new SchemaMismatch(expected[0], "file is empty");
  }
  checkHeader(lines[0], expected);
  const rows: Record<string, string | number>[] = [];
  for (let r = 1; r < lines.length; r++) {
    const cells = lines[r];
    if (cells.length !== expected.length) {
      throw new SchemaMismatch(
        expected[Math.min(cells.length, expected.length - 1)],
        `row ${r} has ${cells.length} cells, expected ${expected.length}`,
      );
    }
    const row: Record<string, string | number> = {};
    expected.forEach((name, i) => {
      if (STRING_COLUMNS.has(name)) {
        row[name] = cells[i];
        return;
      }
      const value = Number(cells[i]);
      if (Number.isNaN(value)) {
        throw new SchemaMismatch(name, `cannot parse '${cells[i]}' in row ${r}`);
      }
      row[name] = value;
    });
    rows.push(row);
  }
  return rows;
}

export function parseSweepCsv(text: string): SweepRow[] {
  return parseTable(text, SWEEP_COLUMNS) as unknown as SweepRow[];
}

export function parseTrialCsv(text: string): TrialRow[] {
  return parseTable(text, TRIAL_COLUMNS) as unknown as TrialRow[];
}

export function parseConnectivityCsv(text: string): ConnectivityRow[] {
  return parseTable(text, CONNECTIVITY_COLUMNS) as unknown as ConnectivityRow[];
}

/** Parse one convergence trace (JSON lines, fixed key set per entry). */
export function parseTraceJsonl(text: string): TraceEntry[] {
  const entries: TraceEntry[] = [];
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaMismatch("outer", "trace file is empty");
  }
  lines.forEach((line, i) => {
    let decoded: Record<string, unknown>;
    try {
      decoded = JSON.parse(line) as Record<string, unknown>;
    } catch {
      throw new SchemaMismatch("outer", `line ${i + 1} is not valid JSON`);
    }
    for (const key of TRACE_KEYS) {
      if (typeof decoded[key] !== "number") {
        throw new SchemaMismatch(key, `missing or non-numeric on line ${i + 1}`);
      }
    }
    entries.push(decoded as unknown as TraceEntry);
  });
  return entries;
}
