/**
 * Just enough hand-rolled SVG to draw line charts and box plots: a
 * linear scale, tick placement, and element builders that escape text.
 * Everything is string concatenation; output depends only on input.
 */

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { top: 40, right: 150, bottom: 48, left: 64 };

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

export function scaleLinear(
  d0: number, d1: number, r0: number, r1: number,
): (x: number) => number {
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (x) => r0 + ((x - d0) / span) * (r1 - r0);
}

/** round tick steps: 1, 2, 5 times a power of ten */
export function ticks(min: number, max: number, count = 5): number[] {
  if (min === max) return [min];
  const rawStep = (max - min) / count;
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = power;
  for (const m of [1, 2, 5, 10]) {
    if (m * power >= rawStep) {
      step = m * power;
      break;
    }
  }
  const out: number[] = [];
  for (let t = Math.ceil(min / step) * step; t <= max + step * 1e-9; t += step) {
    out.push(Number(t.toPrecision(12)));
  }
  return out;
}

export function fmtTick(x: number): string {
  return String(Number(x.toPrecision(6)));
}

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const r2 = (x: number) => Math.round(x * 100) / 100;

export function line(
  x1: number, y1: number, x2: number, y2: number,
  stroke: string, width = 1,
): string {
  return `<line x1="${r2(x1)}" y1="${r2(y1)}" x2="${r2(x2)}" y2="${r2(y2)}" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function polyline(
  points: Array<[number, number]>, stroke: string, width = 2,
): string {
  const p = points.map(([x, y]) => `${r2(x)},${r2(y)}`).join(" ");
  return `<polyline points="${p}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function circle(cx: number, cy: number, r: number, fill: string): string {
  return `<circle cx="${r2(cx)}" cy="${r2(cy)}" r="${r}" fill="${fill}"/>`;
}

export function rect(
  x: number, y: number, w: number, h: number,
  fill: string, stroke = "none",
): string {
  return `<rect x="${r2(x)}" y="${r2(y)}" width="${r2(w)}" height="${r2(h)}" fill="${fill}" stroke="${stroke}"/>`;
}

export function text(
  x: number, y: number, content: string,
  opts: { anchor?: string; size?: number; rotate?: boolean } = {},
): string {
  const anchor = opts.anchor ?? "middle";
  const size = opts.size ?? 12;
  const transform = opts.rotate ? ` transform="rotate(-90 ${r2(x)} ${r2(y)})"` : "";
  return `<text x="${r2(x)}" y="${r2(y)}" text-anchor="${anchor}" font-size="${size}" font-family="sans-serif" fill="#333"${transform}>${esc(content)}</text>`;
}

export interface Frame {
  x: (v: number) => number;
  y: (v: number) => number;
  parts: string[];
}

/** axes, ticks, grid and labels for a plot area; returns the scales */
export function frame(
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  title: string,
): Frame {
  const x = scaleLinear(xDomain[0], xDomain[1], MARGIN.left, WIDTH - MARGIN.right);
  const y = scaleLinear(yDomain[0], yDomain[1], HEIGHT - MARGIN.bottom, MARGIN.top);
  const parts: string[] = [];
  const bottom = HEIGHT - MARGIN.bottom;
  const right = WIDTH - MARGIN.right;

  for (const t of ticks(yDomain[0], yDomain[1])) {
    parts.push(line(MARGIN.left, y(t), right, y(t), "#ddd"));
    parts.push(text(MARGIN.left - 8, y(t) + 4, fmtTick(t), { anchor: "end", size: 11 }));
  }
  for (const t of ticks(xDomain[0], xDomain[1])) {
    parts.push(line(x(t), bottom, x(t), bottom + 5, "#333"));
    parts.push(text(x(t), bottom + 18, fmtTick(t), { size: 11 }));
  }
  parts.push(line(MARGIN.left, bottom, right, bottom, "#333"));
  parts.push(line(MARGIN.left, MARGIN.top, MARGIN.left, bottom, "#333"));
  parts.push(text((MARGIN.left + right) / 2, HEIGHT - 10, xLabel));
  parts.push(text(18, (MARGIN.top + bottom) / 2, yLabel, { rotate: true }));
  parts.push(text((MARGIN.left + right) / 2, 22, title, { size: 14 }));
  return { x, y, parts };
}

export function legend(names: string[], colors: string[]): string[] {
  const parts: string[] = [];
  const x0 = WIDTH - MARGIN.right + 12;
  names.forEach((name, i) => {
    const y0 = MARGIN.top + 8 + i * 18;
    parts.push(rect(x0, y0 - 8, 12, 12, colors[i % colors.length]!));
    parts.push(text(x0 + 18, y0 + 2, name, { anchor: "start", size: 11 }));
  });
  return parts;
}

export function document(parts: string[]): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" width="${WIDTH}" height="${HEIGHT}">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n` +
    parts.join("\n") +
    "\n</svg>\n"
  );
}
