/**
 * Readers for the CSVs the purification pipeline emits.  Each reader
 * validates the header and refuses empty files, reporting what is
 * missing rather than producing an empty plot downstream.
 */

import * as fs from "node:fs";
import Papa from "papaparse";

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface ResultRow {
  dataset: string;
  attack: string;
  rate: number;
  scorer: string;
  judge: string;
  filter: string;
  residual: boolean;
  seed: number;
  phase: string;
  accuracy: number;
  edgesDeleted: number;
}

export interface ScoreRow {
  score: number;
  isInjected: boolean;
}

export interface TrendRow {
  iteration: number;
  accuracy: number;
  series: string;
}

function parseRows(path: string): Record<string, string>[] {
  const text = fs.readFileSync(path, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0]!;
    throw new SchemaError(`${path}: ${e.message} (row ${e.row ?? "?"})`);
  }
  return parsed.data;
}

function requireColumns(
  path: string,
  rows: Record<string, string>[],
  columns: string[],
): void {
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const have = new Set(Object.keys(rows[0]!));
  const missing = columns.filter((c) => !have.has(c));
  if (missing.length > 0) {
    throw new SchemaError(`${path}: missing column(s) ${missing.join(", ")}`);
  }
}

function toNumber(path: string, row: number, field: string, value: string): number {
  const x = Number(value);
  if (!Number.isFinite(x)) {
    throw new SchemaError(`${path}: row ${row}: ${field} is not a number: ${value}`);
  }
  return x;
}

export function readResults(path: string): ResultRow[] {
  const rows = parseRows(path);
  requireColumns(path, rows, [
    "dataset", "attack", "rate", "scorer", "judge", "filter",
    "residual", "seed", "phase", "accuracy", "edges_deleted",
  ]);
  return rows.map((r, i) => ({
    dataset: r["dataset"]!,
    attack: r["attack"]!,
    rate: toNumber(path, i + 2, "rate", r["rate"]!),
    scorer: r["scorer"]!,
    judge: r["judge"]!,
    filter: r["filter"]!,
    residual: r["residual"] === "true",
    seed: toNumber(path, i + 2, "seed", r["seed"]!),
    phase: r["phase"]!,
    accuracy: toNumber(path, i + 2, "accuracy", r["accuracy"]!),
    edgesDeleted: toNumber(path, i + 2, "edges_deleted", r["edges_deleted"]!),
  }));
}

export function readScores(path: string): ScoreRow[] {
  const rows = parseRows(path);
  requireColumns(path, rows, ["u", "v", "score", "is_injected"]);
  return rows.map((r, i) => ({
    score: toNumber(path, i + 2, "score", r["score"]!),
    isInjected: r["is_injected"] === "true",
  }));
}

/** iteration trends: needs iteration plus accuracy or val_accuracy;
 *  an optional series column separates multiple lines */
export function readTrend(path: string): TrendRow[] {
  const rows = parseRows(path);
  requireColumns(path, rows, ["iteration"]);
  const first = rows[0]!;
  const accCol =
    "accuracy" in first ? "accuracy"
    : "val_accuracy" in first ? "val_accuracy"
    : null;
  if (accCol === null) {
    throw new SchemaError(`${path}: missing column(s) accuracy or val_accuracy`);
  }
  return rows.map((r, i) => ({
    iteration: toNumber(path, i + 2, "iteration", r["iteration"]!),
    accuracy: toNumber(path, i + 2, accCol, r[accCol]!),
    series: r["series"] ?? "",
  }));
}
