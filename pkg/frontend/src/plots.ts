/**
 * Figure builders.  Each takes parsed CSV rows and returns a complete
 * SVG document string; no I/O, no randomness, no timestamps.
 */

import type { ResultRow, ScoreRow, TrendRow } from "./csv.js";
import { SchemaError } from "./csv.js";
import * as svg from "./svg.js";

function mean(xs: number[]): number {
  return xs.reduce((a, b) => a + b, 0) / xs.length;
}

function stderr(xs: number[]): number {
  if (xs.length < 2) return 0;
  const m = mean(xs);
  const varSum = xs.reduce((a, b) => a + (b - m) * (b - m), 0);
  return Math.sqrt(varSum / (xs.length - 1)) / Math.sqrt(xs.length);
}

/** numpy-style linear-interpolation percentile on a sorted copy */
export function percentile(values: number[], q: number): number {
  const a = [...values].sort((x, y) => x - y);
  const pos = (a.length - 1) * (q / 100);
  const lo = Math.floor(pos);
  const frac = pos - lo;
  if (lo + 1 >= a.length) return a[a.length - 1]!;
  return a[lo]! * (1 - frac) + a[lo + 1]! * frac;
}

function seriesName(r: ResultRow, manyDatasets: boolean): string {
  const config =
    r.scorer === "none"
      ? "no purification"
      : `${r.scorer} ${r.judge} ${r.filter}${r.residual ? " residual" : ""}`;
  return manyDatasets ? `${r.dataset}: ${config}` : config;
}

/** mean accuracy (with seed error bars) against perturbation rate,
 *  one line per defense configuration */
export function rateCurveSvg(rows: ResultRow[]): string {
  if (rows.length === 0) throw new SchemaError("no rows to plot");
  const manyDatasets = new Set(rows.map((r) => r.dataset)).size > 1;

  const groups = new Map<string, Map<number, number[]>>();
  for (const r of rows) {
    const name = seriesName(r, manyDatasets);
    const byRate = groups.get(name) ?? new Map<number, number[]>();
    const accs = byRate.get(r.rate) ?? [];
    accs.push(r.accuracy);
    byRate.set(r.rate, accs);
    groups.set(name, byRate);
  }

  const names = [...groups.keys()].sort();
  const rates = [...new Set(rows.map((r) => r.rate))].sort((a, b) => a - b);
  const accs = rows.map((r) => r.accuracy);
  const pad = 0.02;
  const f = svg.frame(
    [rates[0]!, rates[rates.length - 1]! || 1e-9],
    [Math.min(...accs) - pad, Math.max(...accs) + pad],
    "perturbation rate",
    "test accuracy",
    "accuracy vs perturbation rate",
  );

  const parts = [...f.parts];
  names.forEach((name, i) => {
    const color = svg.PALETTE[i % svg.PALETTE.length]!;
    const byRate = groups.get(name)!;
    const pts: Array<[number, number]> = [];
    for (const rate of rates) {
      const acc = byRate.get(rate);
      if (!acc) continue;
      const cx = f.x(rate);
      const cy = f.y(mean(acc));
      const err = stderr(acc);
      if (err > 0) {
        parts.push(svg.line(cx, f.y(mean(acc) - err), cx, f.y(mean(acc) + err), color));
      }
      parts.push(svg.circle(cx, cy, 3, color));
      pts.push([cx, cy]);
    }
    parts.push(svg.polyline(pts, color));
  });
  parts.push(...svg.legend(names, svg.PALETTE));
  return svg.document(parts);
}

/** accuracy over purification iterations, one line per series */
export function iterationTrendSvg(rows: TrendRow[]): string {
  if (rows.length === 0) throw new SchemaError("no rows to plot");
  const groups = new Map<string, TrendRow[]>();
  for (const r of rows) {
    const bucket = groups.get(r.series) ?? [];
    bucket.push(r);
    groups.set(r.series, bucket);
  }
  const names = [...groups.keys()].sort();
  const iters = rows.map((r) => r.iteration);
  const accs = rows.map((r) => r.accuracy);
  const pad = 0.02;
  const f = svg.frame(
    [Math.min(...iters), Math.max(...iters) || 1e-9],
    [Math.min(...accs) - pad, Math.max(...accs) + pad],
    "iteration",
    "accuracy",
    "accuracy through purification iterations",
  );
  const parts = [...f.parts];
  names.forEach((name, i) => {
    const color = svg.PALETTE[i % svg.PALETTE.length]!;
    const pts = groups
      .get(name)!
      .slice()
      .sort((a, b) => a.iteration - b.iteration)
      .map((r) => [f.x(r.iteration), f.y(r.accuracy)] as [number, number]);
    for (const [cx, cy] of pts) parts.push(svg.circle(cx, cy, 3, color));
    parts.push(svg.polyline(pts, color));
  });
  if (names.some((n) => n !== "")) {
    parts.push(...svg.legend(names.map((n) => n || "accuracy"), svg.PALETTE));
  }
  return svg.document(parts);
}

/** five-number-summary boxes for genuine vs injected edge scores */
export function scoreBoxSvg(rows: ScoreRow[]): string {
  if (rows.length === 0) throw new SchemaError("no rows to plot");
  const groups: Array<{ name: string; values: number[] }> = [];
  const original = rows.filter((r) => !r.isInjected).map((r) => r.score);
  const injected = rows.filter((r) => r.isInjected).map((r) => r.score);
  if (original.length > 0) groups.push({ name: "original", values: original });
  if (injected.length > 0) groups.push({ name: "injected", values: injected });

  const all = rows.map((r) => r.score);
  const span = Math.max(...all) - Math.min(...all) || 1;
  const pad = span * 0.05;
  const f = svg.frame(
    [0, groups.length + 1],
    [Math.min(...all) - pad, Math.max(...all) + pad],
    "",
    "edge score",
    "edge score distribution",
  );
  const parts = [...f.parts];
  const boxWidth = 60;

  groups.forEach((g, i) => {
    const color = svg.PALETTE[i % svg.PALETTE.length]!;
    const cx = f.x(i + 1);
    const [lo, q1, q2, q3, hi] = [0, 25, 50, 75, 100].map((q) =>
      percentile(g.values, q),
    ) as [number, number, number, number, number];
    parts.push(svg.line(cx, f.y(lo), cx, f.y(q1), "#333"));
    parts.push(svg.line(cx, f.y(q3), cx, f.y(hi), "#333"));
    parts.push(svg.line(cx - 18, f.y(lo), cx + 18, f.y(lo), "#333"));
    parts.push(svg.line(cx - 18, f.y(hi), cx + 18, f.y(hi), "#333"));
    parts.push(
      svg.rect(
        cx - boxWidth / 2, f.y(q3),
        boxWidth, Math.max(f.y(q1) - f.y(q3), 0.5),
        color + "55", color,
      ),
    );
    parts.push(svg.line(cx - boxWidth / 2, f.y(q2), cx + boxWidth / 2, f.y(q2), color, 2));
    parts.push(svg.text(cx, svg.HEIGHT - svg.MARGIN.bottom + 34,
      `${g.name} (n=${g.values.length})`));
  });
  return svg.document(parts);
}
