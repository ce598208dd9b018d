/** Chart view models and minimal SVG rendering.
 *
 * View models carry numbers straight from service responses; the optimum
 * marker always reflects the service's optimum_index (never a local argmax).
 */

import type { CurveResponse } from './types.js';

export interface CurvePoint {
  x: number;
  y: number;
  lo: number;
  hi: number;
}

export interface CurveViewModel {
  points: CurvePoint[];
  optimumIndex: number;
  ambiguous: boolean;
  hasErrorBand: boolean;
  reducedPrecision: boolean;
}

export function curveViewModel(response: CurveResponse): CurveViewModel {
  const points = response.actions.map((x, i) => {
    const se = response.std_errors[i];
    return {
      x,
      y: response.means[i],
      lo: response.means[i] - 2 * se,
      hi: response.means[i] + 2 * se,
    };
  });
  return {
    points,
    optimumIndex: response.optimum_index,
    ambiguous: response.ambiguous,
    hasErrorBand: response.std_errors.some((se) => se > 0),
    reducedPrecision: response.reduced_precision,
  };
}

/** P(next abundance stays at or above the threshold) per action. */
export function survivalViewModel(response: CurveResponse): CurvePoint[] {
  const risk = response.risk ?? [];
  return response.actions.map((x, i) => ({
    x,
    y: 1 - risk[i],
    lo: 1 - risk[i],
    hi: 1 - risk[i],
  }));
}

/** True when the points lie on one straight line (within tolerance). */
export function isCollinear(points: CurvePoint[], tol = 1e-9): boolean {
  if (points.length < 3) {
    return true;
  }
  const [first, last] = [points[0], points[points.length - 1]];
  const dx = last.x - first.x;
  if (dx === 0) {
    return points.every((p) => Math.abs(p.x - first.x) <= tol);
  }
  const slope = (last.y - first.y) / dx;
  const scale = Math.max(1, ...points.map((p) => Math.abs(p.y)));
  return points.every(
    (p) => Math.abs(p.y - (first.y + slope * (p.x - first.x))) <= tol * scale,
  );
}

interface Scale {
  toX(x: number): number;
  toY(y: number): number;
}

function makeScale(
  points: CurvePoint[],
  width: number,
  height: number,
  pad: number,
): Scale {
  const xs = points.map((p) => p.x);
  const ys = points.flatMap((p) => [p.lo, p.hi, p.y]);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  return {
    toX: (x) => pad + ((x - xMin) / xSpan) * (width - 2 * pad),
    toY: (y) => height - pad - ((y - yMin) / ySpan) * (height - 2 * pad),
  };
}

export interface ChartOptions {
  width?: number;
  height?: number;
  title?: string;
}

/** Line chart with a two-standard-error band and an optimum marker. */
export function svgCurveChart(model: CurveViewModel, options: ChartOptions = {}): string {
  const width = options.width ?? 480;
  const height = options.height ?? 260;
  const pad = 28;
  const scale = makeScale(model.points, width, height, pad);

  const line = model.points
    .map((p, i) => `${i === 0 ? 'M' : 'L'}${scale.toX(p.x).toFixed(1)},${scale.toY(p.y).toFixed(1)}`)
    .join(' ');
  const bandTop = model.points
    .map((p, i) => `${i === 0 ? 'M' : 'L'}${scale.toX(p.x).toFixed(1)},${scale.toY(p.hi).toFixed(1)}`)
    .join(' ');
  const bandBottom = [...model.points]
    .reverse()
    .map((p) => `L${scale.toX(p.x).toFixed(1)},${scale.toY(p.lo).toFixed(1)}`)
    .join(' ');

  const best = model.points[model.optimumIndex];
  const marker =
    `<circle class="optimum-marker" data-index="${model.optimumIndex}" ` +
    `cx="${scale.toX(best.x).toFixed(1)}" cy="${scale.toY(best.y).toFixed(1)}" r="5"/>`;
  const band = model.hasErrorBand
    ? `<path class="error-band" d="${bandTop} ${bandBottom} Z"/>`
    : '';
  const title = options.title ? `<title>${options.title}</title>` : '';

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">` +
    `${title}${band}<path class="eu-line" d="${line}" fill="none"/>${marker}</svg>`
  );
}

/** Bar chart of per-province values (allocation shares or efforts). */
export function svgBarChart(
  labels: string[],
  values: number[],
  options: ChartOptions = {},
): string {
  const width = options.width ?? 480;
  const height = options.height ?? 200;
  const pad = 24;
  const vMax = Math.max(...values, 1e-12);
  const slot = (width - 2 * pad) / labels.length;
  const bars = labels
    .map((label, i) => {
      const h = ((height - 2 * pad) * values[i]) / vMax;
      const x = pad + i * slot + slot * 0.1;
      const y = height - pad - h;
      return (
        `<rect class="bar" data-label="${label}" data-value="${values[i]}" ` +
        `x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${(slot * 0.8).toFixed(1)}" ` +
        `height="${h.toFixed(1)}"/>` +
        `<text x="${(x + slot * 0.4).toFixed(1)}" y="${height - 6}" text-anchor="middle">${label}</text>`
      );
    })
    .join('');
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}">${bars}</svg>`;
}
