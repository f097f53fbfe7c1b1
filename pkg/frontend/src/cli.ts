#!/usr/bin/env node
/**
 * Command line front end.
 *
 * convert: citation-network raw files (.content/.cites) to a dataset
 *          directory the purification tools can load.
 * plot:    results/scores/trend CSVs to standalone SVG figures.
 *
 * Exit codes: 0 success, 1 missing or unreadable files, 2 bad usage
 * or malformed input data.
 */

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import * as fs from "node:fs";
import * as path from "node:path";
import { loadRaw, RawParseError } from "./raw.js";
import { convertDataset } from "./convert.js";
import { readResults, readScores, readTrend, SchemaError } from "./csv.js";
import { iterationTrendSvg, rateCurveSvg, scoreBoxSvg } from "./plots.js";

const USAGE = `usage:
  convert --raw DIR --out DIR [--name NAME] [--seed N] [--largest-component]
      Read the .content and .cites files in DIR and write a dataset
      directory (meta.json, edges.tsv, features.tsv, labels.tsv,
      split.json) to OUT.

  plot --csv FILE --kind KIND --out FILE
      Render FILE to an SVG figure at OUT (the output is always SVG
      markup regardless of the extension).  KIND is one of:
        rate_curve       results CSV, accuracy vs perturbation rate
        iteration_trend  iteration/accuracy CSV from a purify report
        score_box        edge-score CSV, original vs injected boxes
`;

function fail(code: number, message: string): number {
  process.stderr.write(message + "\n");
  return code;
}

/** find exactly one file with the given extension in a directory */
function findRawFile(dir: string, ext: string): string {
  const hits = fs.readdirSync(dir).filter((f) => f.endsWith(ext)).sort();
  if (hits.length === 0) {
    throw new Error(`no ${ext} file in ${dir}`);
  }
  if (hits.length > 1) {
    throw new Error(`multiple ${ext} files in ${dir}: ${hits.join(", ")}`);
  }
  return path.join(dir, hits[0]!);
}

function cmdConvert(args: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args,
      options: {
        raw: { type: "string" },
        out: { type: "string" },
        name: { type: "string" },
        seed: { type: "string", default: "0" },
        "largest-component": { type: "boolean", default: false },
      },
      allowPositionals: false,
    });
  } catch (e) {
    return fail(2, `convert: ${(e as Error).message}\n${USAGE}`);
  }
  const { raw, out, name, seed } = parsed.values;
  if (!raw || !out) {
    return fail(2, `convert: --raw and --out are required\n${USAGE}`);
  }
  const seedNum = Number(seed);
  if (!Number.isInteger(seedNum) || seedNum < 0) {
    return fail(2, `convert: --seed must be a non-negative integer, got ${seed}`);
  }
  if (!fs.existsSync(raw) || !fs.statSync(raw).isDirectory()) {
    return fail(1, `convert: raw directory not found: ${raw}`);
  }

  let contentPath: string;
  let citesPath: string;
  try {
    contentPath = findRawFile(raw, ".content");
    citesPath = findRawFile(raw, ".cites");
  } catch (e) {
    return fail(1, `convert: ${(e as Error).message}`);
  }

  const datasetName = name ?? path.basename(contentPath, ".content");
  try {
    const rawData = loadRaw(contentPath, citesPath);
    if (rawData.skippedEdges > 0) {
      process.stderr.write(
        `convert: skipped ${rawData.skippedEdges} citation(s) with unknown ids\n`,
      );
    }
    if (rawData.droppedSelfLoops > 0) {
      process.stderr.write(
        `convert: dropped ${rawData.droppedSelfLoops} self loop(s)\n`,
      );
    }
    const summary = convertDataset(rawData, out, {
      name: datasetName,
      largestComponent: parsed.values["largest-component"],
      seed: seedNum,
    });
    if (summary.droppedNodes > 0) {
      process.stderr.write(
        `convert: dropped ${summary.droppedNodes} node(s) outside the largest component\n`,
      );
    }
    process.stderr.write(
      `convert: wrote ${datasetName} to ${out}: ` +
        `${summary.numNodes} nodes, ${summary.numEdges} edges, ` +
        `${summary.numFeatures} features, ${summary.numClasses} classes\n`,
    );
    return 0;
  } catch (e) {
    if (e instanceof RawParseError) return fail(2, `convert: ${e.message}`);
    return fail(1, `convert: ${(e as Error).message}`);
  }
}

const PLOT_KINDS = ["rate_curve", "iteration_trend", "score_box"] as const;

function cmdPlot(args: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args,
      options: {
        csv: { type: "string" },
        kind: { type: "string" },
        out: { type: "string" },
      },
      allowPositionals: false,
    });
  } catch (e) {
    return fail(2, `plot: ${(e as Error).message}\n${USAGE}`);
  }
  const { csv, kind, out } = parsed.values;
  if (!csv || !kind || !out) {
    return fail(2, `plot: --csv, --kind and --out are required\n${USAGE}`);
  }
  if (!(PLOT_KINDS as readonly string[]).includes(kind)) {
    return fail(2, `plot: unknown kind ${kind}; expected one of ${PLOT_KINDS.join(", ")}`);
  }
  if (!fs.existsSync(csv)) {
    return fail(1, `plot: input not found: ${csv}`);
  }
  try {
    let markup: string;
    if (kind === "rate_curve") markup = rateCurveSvg(readResults(csv));
    else if (kind === "iteration_trend") markup = iterationTrendSvg(readTrend(csv));
    else markup = scoreBoxSvg(readScores(csv));
    fs.mkdirSync(path.dirname(path.resolve(out)), { recursive: true });
    fs.writeFileSync(out, markup);
    process.stderr.write(`plot: wrote ${kind} figure to ${out}\n`);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) return fail(2, `plot: ${e.message}`);
    return fail(1, `plot: ${(e as Error).message}`);
  }
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (!command || command === "--help" || command === "-h") {
    process.stderr.write(USAGE);
    return command ? 0 : 2;
  }
  if (command === "convert") return cmdConvert(rest);
  if (command === "plot") return cmdPlot(rest);
  return fail(2, `unknown command: ${command}\n${USAGE}`);
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(path.resolve(process.argv[1])).href;

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
