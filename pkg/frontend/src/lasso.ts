/** Lasso selection over scatter points: even-odd point-in-polygon. */

import type { ScatterPoint } from "./api.js";

export class DegeneratePolygonError extends Error {}

export type Vertex = [number, number];

/** Even-odd rule: a point on an edge follows the ray-crossing parity,
 *  which is deterministic for fixed inputs. */
export function pointInPolygon(x: number, y: number, polygon: Vertex[]): boolean {
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i, i += 1) {
    const [xi, yi] = polygon[i]!;
    const [xj, yj] = polygon[j]!;
    const crosses = yi > y !== yj > y && x < ((xj - xi) * (y - yi)) / (yj - yi) + xi;
    if (crosses) inside = !inside;
  }
  return inside;
}

export function lassoSelect(points: ScatterPoint[], polygon: Vertex[]): string[] {
  if (polygon.length < 3) {
    throw new DegeneratePolygonError(`lasso polygon needs at least 3 vertices, got ${polygon.length}`);
  }
  return points.filter((p) => pointInPolygon(p.x, p.y, polygon)).map((p) => p.caseId);
}
