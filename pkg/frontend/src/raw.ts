/**
 * Parsers for publicly distributed citation-network files.
 *
 * The "content" file carries one node per line: an id, a fixed-width
 * block of numeric features, and a class label.  The "cites" file
 * carries one link per line as a pair of ids.  Fields may be separated
 * by tabs or runs of spaces; both orientations of a link mean the same
 * undirected edge.  Some distributions cite ids that never appear in
 * the content file; those links are counted and skipped rather than
 * treated as fatal.
 */

import * as fs from "node:fs";

export class RawParseError extends Error {
  constructor(
    public readonly file: string,
    public readonly line: number,
    message: string,
  ) {
    super(`${file}:${line}: ${message}`);
    this.name = "RawParseError";
  }
}

export interface RawNodes {
  ids: string[];
  features: number[][];
  labels: string[];
}

export interface RawDataset extends RawNodes {
  /** canonical (u, v) with u < v, deduplicated and sorted */
  edges: Array<[number, number]>;
  skippedEdges: number;
  droppedSelfLoops: number;
}

function splitFields(line: string): string[] {
  return line.split(/[ \t]+/).filter((t) => t.length > 0);
}

export function parseContent(path: string): RawNodes {
  const text = fs.readFileSync(path, "utf-8");
  const ids: string[] = [];
  const features: number[][] = [];
  const labels: string[] = [];
  const seen = new Set<string>();
  let width = -1;

  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!.replace(/\r$/, "");
    if (line.trim() === "") continue;
    const fields = splitFields(line);
    if (fields.length < 3) {
      throw new RawParseError(
        path, i + 1, `expected id, features and a label, got ${fields.length} field(s)`,
      );
    }
    const id = fields[0]!;
    const label = fields[fields.length - 1]!;
    const feats = fields.slice(1, -1).map((tok, j) => {
      const value = Number(tok);
      if (!Number.isFinite(value)) {
        throw new RawParseError(
          path, i + 1, `feature ${j} is not a number: ${JSON.stringify(tok)}`,
        );
      }
      return value;
    });
    if (width === -1) {
      width = feats.length;
    } else if (feats.length !== width) {
      throw new RawParseError(
        path, i + 1, `expected ${width} features, got ${feats.length}`,
      );
    }
    if (seen.has(id)) {
      throw new RawParseError(path, i + 1, `duplicate node id ${JSON.stringify(id)}`);
    }
    seen.add(id);
    ids.push(id);
    features.push(feats);
    labels.push(label);
  }
  if (ids.length === 0) {
    throw new RawParseError(path, 0, "no nodes found");
  }
  return { ids, features, labels };
}

export function parseCites(
  path: string,
  idIndex: Map<string, number>,
): { edges: Array<[number, number]>; skippedEdges: number; droppedSelfLoops: number } {
  const text = fs.readFileSync(path, "utf-8");
  const keys = new Set<number>();
  let skipped = 0;
  let selfLoops = 0;
  const n = idIndex.size;

  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!.replace(/\r$/, "");
    if (line.trim() === "") continue;
    const fields = splitFields(line);
    if (fields.length !== 2) {
      throw new RawParseError(
        path, i + 1, `expected two ids per link, got ${fields.length} field(s)`,
      );
    }
    const a = idIndex.get(fields[0]!);
    const b = idIndex.get(fields[1]!);
    if (a === undefined || b === undefined) {
      skipped += 1; // id never described in the content file
      continue;
    }
    if (a === b) {
      selfLoops += 1;
      continue;
    }
    const u = Math.min(a, b);
    const v = Math.max(a, b);
    keys.add(u * n + v);
  }

  const edges = [...keys]
    .sort((x, y) => x - y)
    .map((k) => [Math.floor(k / n), k % n] as [number, number]);
  return { edges, skippedEdges: skipped, droppedSelfLoops: selfLoops };
}

export function loadRaw(contentPath: string, citesPath: string): RawDataset {
  const nodes = parseContent(contentPath);
  const idIndex = new Map(nodes.ids.map((id, i) => [id, i]));
  const links = parseCites(citesPath, idIndex);
  return { ...nodes, ...links };
}
