/**
 * Emit a parsed citation network in the plain-text dataset layout the
 * purification pipeline loads: meta.json, edges.tsv, features.tsv,
 * labels.tsv, split.json.  Output is a pure function of the input and
 * options, so re-running a conversion is byte-identical.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import type { RawDataset } from "./raw.js";

export interface ConvertOptions {
  name: string;
  /** keep only the largest connected component */
  largestComponent?: boolean;
  /** split shuffle seed */
  seed?: number;
}

export interface ConvertSummary {
  numNodes: number;
  numEdges: number;
  numFeatures: number;
  numClasses: number;
  droppedNodes: number;
}

/** small deterministic PRNG; good enough for a split shuffle */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function shuffled(n: number, seed: number): number[] {
  const rand = mulberry32(seed);
  const order = Array.from({ length: n }, (_, i) => i);
  for (let i = n - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [order[i], order[j]] = [order[j]!, order[i]!];
  }
  return order;
}

class UnionFind {
  parent: number[];
  constructor(n: number) {
    this.parent = Array.from({ length: n }, (_, i) => i);
  }
  find(a: number): number {
    while (this.parent[a] !== a) {
      this.parent[a] = this.parent[this.parent[a]!]!;
      a = this.parent[a]!;
    }
    return a;
  }
  union(a: number, b: number): void {
    const ra = this.find(a);
    const rb = this.find(b);
    if (ra !== rb) this.parent[ra] = rb;
  }
}

/** indices of the largest component, ascending; ties go to the
 *  component containing the lowest node index */
export function largestComponentNodes(
  numNodes: number,
  edges: Array<[number, number]>,
): number[] {
  const uf = new UnionFind(numNodes);
  for (const [u, v] of edges) uf.union(u, v);
  const members = new Map<number, number[]>();
  for (let i = 0; i < numNodes; i++) {
    const root = uf.find(i);
    const bucket = members.get(root);
    if (bucket) bucket.push(i);
    else members.set(root, [i]);
  }
  let best: number[] | null = null;
  for (const bucket of members.values()) {
    if (
      best === null ||
      bucket.length > best.length ||
      (bucket.length === best.length && bucket[0]! < best[0]!)
    ) {
      best = bucket;
    }
  }
  return best!;
}

function formatNumber(x: number): string {
  // shortest round-trip decimal; integers come out bare
  return Object.is(x, -0) ? "0" : String(x);
}

export function convertDataset(
  raw: RawDataset,
  outDir: string,
  opts: ConvertOptions,
): ConvertSummary {
  let keep = Array.from({ length: raw.ids.length }, (_, i) => i);
  if (opts.largestComponent) {
    keep = largestComponentNodes(raw.ids.length, raw.edges);
  }
  const dropped = raw.ids.length - keep.length;

  const newIndex = new Map(keep.map((old, i) => [old, i]));
  const n = keep.length;
  const features = keep.map((old) => raw.features[old]!);
  const labelNames = [...new Set(keep.map((old) => raw.labels[old]!))].sort();
  const labelId = new Map(labelNames.map((name, i) => [name, i]));
  const labels = keep.map((old) => labelId.get(raw.labels[old]!)!);

  const edges: Array<[number, number]> = [];
  for (const [u, v] of raw.edges) {
    const nu = newIndex.get(u);
    const nv = newIndex.get(v);
    if (nu !== undefined && nv !== undefined) {
      edges.push([Math.min(nu, nv), Math.max(nu, nv)]);
    }
  }
  edges.sort((a, b) => a[0] * n + a[1] - (b[0] * n + b[1]));

  // deterministic split: a fifth of the nodes feed train+val, a tenth
  // of that pool is validation, everything else is test
  const order = shuffled(n, opts.seed ?? 0);
  const pool = Math.floor(0.2 * n);
  const valSize = Math.floor(0.1 * pool);
  const asc = (a: number, b: number) => a - b;
  const train = order.slice(0, pool - valSize).sort(asc);
  const val = order.slice(pool - valSize, pool).sort(asc);
  const test = order.slice(pool).sort(asc);

  fs.mkdirSync(outDir, { recursive: true });
  const write = (name: string, content: string) =>
    fs.writeFileSync(path.join(outDir, name), content);

  const meta = {
    name: opts.name,
    num_nodes: n,
    num_features: features[0]!.length,
    num_classes: labelNames.length,
    format_version: 1,
  };
  write("meta.json", JSON.stringify(meta, null, 2) + "\n");
  write("edges.tsv", edges.map(([u, v]) => `${u}\t${v}`).join("\n") + "\n");
  write(
    "features.tsv",
    features.map((row) => row.map(formatNumber).join("\t")).join("\n") + "\n",
  );
  write("labels.tsv", labels.join("\n") + "\n");
  write(
    "split.json",
    JSON.stringify({ train, val, test }, null, 2) + "\n",
  );

  return {
    numNodes: n,
    numEdges: edges.length,
    numFeatures: features[0]!.length,
    numClasses: labelNames.length,
    droppedNodes: dropped,
  };
}
