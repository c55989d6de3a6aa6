/** Angle and SVG-path helpers for the fusion glyph.
 *
 *  Angles are degrees, measured clockwise from 12 o'clock, matching how the
 *  glyph reads: the three outer segments sit at fixed offsets 0/120/240 and
 *  a pair's donut fills clockwise from its segment start.
 */

export const SEGMENT_SPAN = 120;
export const SEGMENT_OFFSETS = [0, 120, 240] as const;

/** Angular size of one pair-similarity donut: 120 degrees at similarity 1. */
export function donutAngle(pairSim: number): number {
  if (!(pairSim >= 0 && pairSim <= 1)) {
    throw new RangeError(`pair similarity must be in [0, 1], got ${pairSim}`);
  }
  return SEGMENT_SPAN * pairSim;
}

/** Angular size of the inner triple-similarity pie: full circle at 1. */
export function innerPieAngle(tripleSim: number): number {
  if (!(tripleSim >= 0 && tripleSim <= 1)) {
    throw new RangeError(`triple similarity must be in [0, 1], got ${tripleSim}`);
  }
  return 360 * tripleSim;
}

export interface Point {
  x: number;
  y: number;
}

export function polarPoint(cx: number, cy: number, radius: number, angleDeg: number): Point {
  const rad = ((angleDeg - 90) * Math.PI) / 180; // 0 degrees points up
  return { x: cx + radius * Math.cos(rad), y: cy + radius * Math.sin(rad) };
}

const fmt = (v: number) => Number(v.toFixed(4));

/** Circular arc path between two clockwise angles at one radius. */
export function arcPath(cx: number, cy: number, r: number, startDeg: number, endDeg: number): string {
  const start = polarPoint(cx, cy, r, startDeg);
  const end = polarPoint(cx, cy, r, endDeg);
  const largeArc = endDeg - startDeg > 180 ? 1 : 0;
  return `M ${fmt(start.x)} ${fmt(start.y)} A ${fmt(r)} ${fmt(r)} 0 ${largeArc} 1 ${fmt(end.x)} ${fmt(end.y)}`;
}

/** Closed annular (donut) sector between two radii and two clockwise angles. */
export function annularSectorPath(
  cx: number,
  cy: number,
  rInner: number,
  rOuter: number,
  startDeg: number,
  endDeg: number,
): string {
  const largeArc = endDeg - startDeg > 180 ? 1 : 0;
  const outerStart = polarPoint(cx, cy, rOuter, startDeg);
  const outerEnd = polarPoint(cx, cy, rOuter, endDeg);
  const innerEnd = polarPoint(cx, cy, rInner, endDeg);
  const innerStart = polarPoint(cx, cy, rInner, startDeg);
  return [
    `M ${fmt(outerStart.x)} ${fmt(outerStart.y)}`,
    `A ${fmt(rOuter)} ${fmt(rOuter)} 0 ${largeArc} 1 ${fmt(outerEnd.x)} ${fmt(outerEnd.y)}`,
    `L ${fmt(innerEnd.x)} ${fmt(innerEnd.y)}`,
    `A ${fmt(rInner)} ${fmt(rInner)} 0 ${largeArc} 0 ${fmt(innerStart.x)} ${fmt(innerStart.y)}`,
    "Z",
  ].join(" ");
}

/** Pie sector from the center out to one radius. */
export function pieSectorPath(cx: number, cy: number, r: number, startDeg: number, endDeg: number): string {
  const largeArc = endDeg - startDeg > 180 ? 1 : 0;
  const start = polarPoint(cx, cy, r, startDeg);
  const end = polarPoint(cx, cy, r, endDeg);
  return [
    `M ${fmt(cx)} ${fmt(cy)}`,
    `L ${fmt(start.x)} ${fmt(start.y)}`,
    `A ${fmt(r)} ${fmt(r)} 0 ${largeArc} 1 ${fmt(end.x)} ${fmt(end.y)}`,
    "Z",
  ].join(" ");
}

/** Short radial tick crossing one radius at the given angle. */
export function radialTickPath(cx: number, cy: number, r: number, halfLength: number, angleDeg: number): string {
  const inner = polarPoint(cx, cy, r - halfLength, angleDeg);
  const outer = polarPoint(cx, cy, r + halfLength, angleDeg);
  return `M ${fmt(inner.x)} ${fmt(inner.y)} L ${fmt(outer.x)} ${fmt(outer.y)}`;
}
