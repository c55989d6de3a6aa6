/** Fusion-glyph view model and SVG rendering.
 *
 *  Outer ring: three fixed 120-degree segments (image–text, image–indicator,
 *  text–indicator), each holding a donut whose angle encodes that pair's
 *  Jaccard similarity and an arc box plot of the pair's distribution over
 *  the whole population. Inner circle: a pie whose angle encodes the triple
 *  Jaccard similarity. Geometry is a pure function of the metrics.
 */

import type { FiveNumber, GlyphMetrics, PairKind } from "./api.js";
import {
  SEGMENT_OFFSETS,
  annularSectorPath,
  arcPath,
  donutAngle,
  innerPieAngle,
  pieSectorPath,
  radialTickPath,
} from "./geometry.js";

export const SEGMENT_ORDER: readonly PairKind[] = ["imageText", "imageIndicator", "textIndicator"];

export interface GlyphSegment {
  kind: PairKind;
  offset: number; // fixed segment start: 0, 120 or 240 degrees
  donutAngle: number; // 120 * pairSim
  /** Population five-number summary mapped onto segment angles. */
  arcBox: { min: number; q1: number; median: number; q3: number; max: number };
}

export interface GlyphViewModel {
  caseId: string;
  center: { x: number; y: number };
  segments: GlyphSegment[];
  innerPieAngle: number; // 360 * tripleSim
}

const SEGMENT_COLORS: Record<PairKind, string> = {
  imageText: "#4e79a7",
  imageIndicator: "#f28e2b",
  textIndicator: "#59a14f",
};

function boxAngles(offset: number, stats: FiveNumber): GlyphSegment["arcBox"] {
  return {
    min: offset + donutAngle(stats.min),
    q1: offset + donutAngle(stats.q1),
    median: offset + donutAngle(stats.median),
    q3: offset + donutAngle(stats.q3),
    max: offset + donutAngle(stats.max),
  };
}

export function buildGlyphViewModel(
  metrics: GlyphMetrics,
  center: { x: number; y: number },
): GlyphViewModel {
  const segments = SEGMENT_ORDER.map((kind, i) => {
    const offset = SEGMENT_OFFSETS[i]!;
    return {
      kind,
      offset,
      donutAngle: donutAngle(metrics.pairSim[kind]),
      arcBox: boxAngles(offset, metrics.pairPopulation[kind]),
    };
  });
  return {
    caseId: metrics.caseId,
    center,
    segments,
    innerPieAngle: innerPieAngle(metrics.tripleSim),
  };
}

export interface GlyphStyle {
  outerRadius: number;
  ringWidth: number;
  boxRadius: number; // radius of the arc box plot band
  innerRadius: number; // triple-similarity pie
}

export const DEFAULT_GLYPH_STYLE: GlyphStyle = {
  outerRadius: 18,
  ringWidth: 5,
  boxRadius: 11,
  innerRadius: 7,
};

const fmt = (v: number) => Number(v.toFixed(4));

/** Render one glyph as an SVG group (pure string; no DOM required). */
export function renderGlyph(vm: GlyphViewModel, style: GlyphStyle = DEFAULT_GLYPH_STYLE): string {
  const { x, y } = vm.center;
  const rOuter = style.outerRadius;
  const rInner = rOuter - style.ringWidth;
  const parts: string[] = [
    `<g class="glyph" data-case-id="${vm.caseId}" transform="translate(${fmt(x)} ${fmt(y)})">`,
    `<circle class="glyph-outline" r="${rOuter}" fill="none" stroke="#ccc" stroke-width="0.5"/>`,
  ];

  for (const segment of vm.segments) {
    const color = SEGMENT_COLORS[segment.kind];
    // faint track for the full 120-degree segment
    parts.push(
      `<path class="segment-track" data-kind="${segment.kind}" d="${annularSectorPath(
        0, 0, rInner, rOuter, segment.offset, segment.offset + 120,
      )}" fill="${color}" fill-opacity="0.15"/>`,
    );
    if (segment.donutAngle > 0) {
      parts.push(
        `<path class="segment-donut" data-kind="${segment.kind}" d="${annularSectorPath(
          0, 0, rInner, rOuter, segment.offset, segment.offset + segment.donutAngle,
        )}" fill="${color}"/>`,
      );
    }
    // arc box plot: whisker min..max, box q1..q3, median tick
    const box = segment.arcBox;
    if (box.max > box.min) {
      parts.push(
        `<path class="box-whisker" data-kind="${segment.kind}" d="${arcPath(
          0, 0, style.boxRadius, box.min, box.max,
        )}" fill="none" stroke="${color}" stroke-width="0.6"/>`,
      );
    }
    if (box.q3 > box.q1) {
      parts.push(
        `<path class="box-iqr" data-kind="${segment.kind}" d="${arcPath(
          0, 0, style.boxRadius, box.q1, box.q3,
        )}" fill="none" stroke="${color}" stroke-width="2"/>`,
      );
    }
    for (const [cls, angle] of [
      ["box-min", box.min],
      ["box-median", box.median],
      ["box-max", box.max],
    ] as const) {
      parts.push(
        `<path class="${cls}" data-kind="${segment.kind}" d="${radialTickPath(
          0, 0, style.boxRadius, 1.6, angle,
        )}" stroke="${color}" stroke-width="0.8"/>`,
      );
    }
  }

  if (vm.innerPieAngle >= 360) {
    parts.push(`<circle class="inner-pie" r="${style.innerRadius}" fill="#777"/>`);
  } else if (vm.innerPieAngle > 0) {
    parts.push(
      `<path class="inner-pie" d="${pieSectorPath(0, 0, style.innerRadius, 0, vm.innerPieAngle)}" fill="#777"/>`,
    );
  }
  parts.push("</g>");
  return parts.join("\n");
}
