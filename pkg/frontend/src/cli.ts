/**
 * plot --kind {sweep|antennas|convergence|connectivity} --in PATH [PATH...]
 *      --out PATH
 *
 * Reads harness CSV/JSON-lines outputs, writes one SVG. Inputs are never
 * modified; the output file is only written after a successful render.
 * Exit codes: 0 success, 1 usage or schema error, 2 I/O failure.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import {
  FigureKind,
  NamedTrace,
  renderConnectivity,
  renderConvergence,
  renderSweep,
} from "./figures.js";
import {
  SchemaMismatch,
  parseConnectivityCsv,
  parseSweepCsv,
  parseTraceJsonl,
} from "./schema.js";

const KINDS: FigureKind[] = ["sweep", "antennas", "convergence", "connectivity"];
const USAGE =
  "usage: plot --kind {sweep|antennas|convergence|connectivity} " +
  "--in PATH [PATH...] --out PATH";

interface Args {
  kind: FigureKind;
  inputs: string[];
  out: string;
}

class UsageError extends Error {}

export function parseArgs(argv: string[]): Args {
  let kind: string | undefined;
  const inputs: string[] = [];
  let out: string | undefined;
  let i = 0;
  while (i < argv.length) {
    const flag = argv[i];
    if (flag === "--kind") {
      kind = argv[++i];
      i++;
    } else if (flag === "--in") {
      i++;
      while (i < argv.length && !argv[i].startsWith("--")) {
        inputs.push(argv[i]);
        i++;
      }
    } else if (flag === "--out") {
      out = argv[++i];
      i++;
    } else {
      throw new UsageError(`unknown argument '${flag}'\n${USAGE}`);
    }
  }
  if (!kind || !KINDS.includes(kind as FigureKind)) {
    throw new UsageError(`--kind must be one of ${KINDS.join(", ")}\n${USAGE}`);
  }
  if (inputs.length === 0 || !out) {
    throw new UsageError(`--in and --out are required\n${USAGE}`);
  }
  return { kind: kind as FigureKind, inputs, out };
}

function renderFigure(args: Args): string {
  const texts = args.inputs.map((path) => readFileSync(path, "utf-8"));
  switch (args.kind) {
    case "sweep":
    case "antennas":
      return renderSweep(texts.flatMap(parseSweepCsv), args.kind);
    case "convergence": {
      const traces: NamedTrace[] = texts.map((text, i) => ({
        name: basename(args.inputs[i]).replace(/\.jsonl$/, ""),
        entries: parseTraceJsonl(text),
      }));
      return renderConvergence(traces);
    }
    case "connectivity":
      return renderConnectivity(texts.flatMap(parseConnectivityCsv));
  }
}

export function runCli(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
  let svg: string;
  try {
    svg = renderFigure(args);
  } catch (err) {
    if (err instanceof SchemaMismatch) {
      console.error(err.message);
      return 1;
    }
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    writeFileSync(args.out, svg, "utf-8");
  } catch (err) {
    console.error(`cannot write ${args.out}: ${(err as Error).message}`);
    return 2;
  }
  console.log(`wrote ${args.out}`);
  return 0;
}

if (process.argv[1] && /cli\.(js|ts)$/.test(process.argv[1])) {
  process.exit(runCli(process.argv.slice(2)));
}
