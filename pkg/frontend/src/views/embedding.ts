/** Embedding view: four scatter panels (fusion on top, one per modality
 *  below), fusion-space glyphs, KNN range circles, and cross-space
 *  connecting polylines for the lassoed group. Pure SVG-string rendering.
 */

import type { GlyphMetrics, GroupLinks, Modality, ScatterPoint, Space } from "../api.js";
import { DEFAULT_GLYPH_STYLE, buildGlyphViewModel, renderGlyph } from "../glyph.js";

export const PANEL_SIZE = 240;
export const PANEL_GAP = 16;

const UNIMODAL: readonly Modality[] = ["image", "text", "indicator"];

interface Transform {
  sx: (x: number) => number;
  sy: (y: number) => number;
  scale: number;
}

export interface PanelLayout {
  space: Space;
  originX: number;
  originY: number;
  transform: Transform;
}

function fitTransform(points: ScatterPoint[], size: number, pad = 18): Transform {
  if (points.length === 0) {
    return { sx: (x) => x, sy: (y) => y, scale: 1 };
  }
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const span = Math.max(maxX - minX, maxY - minY) || 1;
  const scale = (size - 2 * pad) / span;
  return {
    sx: (x) => pad + (x - minX) * scale,
    sy: (y) => pad + (y - minY) * scale,
    scale,
  };
}

/** Panel geometry: fusion spans the top row, modalities share the bottom. */
export function panelLayouts(coords: Record<Space, ScatterPoint[]>): PanelLayout[] {
  const layouts: PanelLayout[] = [
    {
      space: "fusion",
      originX: PANEL_SIZE + PANEL_GAP,
      originY: 0,
      transform: fitTransform(coords.fusion, PANEL_SIZE),
    },
  ];
  UNIMODAL.forEach((space, i) => {
    layouts.push({
      space,
      originX: i * (PANEL_SIZE + PANEL_GAP),
      originY: PANEL_SIZE + PANEL_GAP,
      transform: fitTransform(coords[space], PANEL_SIZE),
    });
  });
  return layouts;
}

const fmt = (v: number) => Number(v.toFixed(3));

function renderPanel(
  layout: PanelLayout,
  points: ScatterPoint[],
  options: {
    highlighted?: Set<string>;
    knn?: { center: ScatterPoint; radius: number; memberIds: Set<string> };
    glyphs?: Map<string, GlyphMetrics>;
  },
): string {
  const { transform } = layout;
  const parts = [
    `<g class="panel" data-space="${layout.space}" transform="translate(${layout.originX} ${layout.originY})">`,
    `<rect class="panel-frame" width="${PANEL_SIZE}" height="${PANEL_SIZE}" fill="none" stroke="#ddd"/>`,
    `<text class="panel-title" x="6" y="12">${layout.space}</text>`,
  ];
  if (options.knn) {
    // circle centered on the query point, extending to the farthest neighbor
    const { center, radius } = options.knn;
    parts.push(
      `<circle class="knn-circle" cx="${fmt(transform.sx(center.x))}" cy="${fmt(
        transform.sy(center.y),
      )}" r="${fmt(radius * transform.scale)}" fill="none" stroke="#e45b7b" stroke-dasharray="3 2"/>`,
    );
  }
  for (const point of points) {
    if (options.glyphs?.has(point.caseId)) continue; // drawn as a glyph instead
    const classes = ["point"];
    if (options.highlighted?.has(point.caseId)) classes.push("selected");
    if (options.knn?.memberIds.has(point.caseId)) classes.push("knn-member");
    parts.push(
      `<circle class="${classes.join(" ")}" data-case-id="${point.caseId}" cx="${fmt(
        transform.sx(point.x),
      )}" cy="${fmt(transform.sy(point.y))}" r="2.5"/>`,
    );
  }
  if (options.glyphs) {
    for (const point of points) {
      const metrics = options.glyphs.get(point.caseId);
      if (!metrics) continue;
      const vm = buildGlyphViewModel(metrics, {
        x: transform.sx(point.x),
        y: transform.sy(point.y),
      });
      parts.push(renderGlyph(vm, DEFAULT_GLYPH_STYLE));
    }
  }
  parts.push("</g>");
  return parts.join("\n");
}

/** Connecting polylines: for each lassoed case, one polyline per unimodal
 *  space running from the case's fusion position to its position in that
 *  space (page coordinates across panels). */
export function renderGroupPolylines(links: GroupLinks, layouts: PanelLayout[]): string {
  const bySpace = new Map(layouts.map((l) => [l.space, l]));
  const fusion = bySpace.get("fusion");
  if (!fusion) return "";
  const fusionPos = new Map(links.spaces.fusion.map((p) => [p.caseId, p]));
  const parts: string[] = [];
  for (const space of UNIMODAL) {
    const layout = bySpace.get(space);
    if (!layout) continue;
    for (const point of links.spaces[space]) {
      const anchor = fusionPos.get(point.caseId);
      if (!anchor) continue;
      const x1 = fusion.originX + fusion.transform.sx(anchor.x);
      const y1 = fusion.originY + fusion.transform.sy(anchor.y);
      const x2 = layout.originX + layout.transform.sx(point.x);
      const y2 = layout.originY + layout.transform.sy(point.y);
      parts.push(
        `<polyline class="group-link" data-space="${space}" data-case-id="${point.caseId}" points="${fmt(
          x1,
        )},${fmt(y1)} ${fmt(x2)},${fmt(y2)}" fill="none" stroke="#888" stroke-width="0.8"/>`,
      );
    }
  }
  return parts.join("\n");
}

export interface EmbeddingViewProps {
  coords: Record<Space, ScatterPoint[]>;
  glyphs: Map<string, GlyphMetrics>;
  selected: GlyphMetrics | null;
  groupLinks: GroupLinks | null;
  lassoIds: string[];
}

export function renderEmbeddingView(props: EmbeddingViewProps): string {
  const layouts = panelLayouts(props.coords);
  const highlighted = new Set(props.lassoIds);
  if (props.selected) highlighted.add(props.selected.caseId);
  const width = 3 * PANEL_SIZE + 2 * PANEL_GAP;
  const height = 2 * PANEL_SIZE + PANEL_GAP;
  const parts = [
    `<svg class="embedding-view" viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">`,
  ];
  for (const layout of layouts) {
    const points = props.coords[layout.space];
    let knn;
    if (props.selected && layout.space !== "fusion") {
      const neighbor = props.selected.neighbors[layout.space as Modality];
      const center = points.find((p) => p.caseId === props.selected!.caseId);
      if (neighbor && center) {
        knn = { center, radius: neighbor.radius, memberIds: new Set(neighbor.ids) };
      }
    }
    parts.push(
      renderPanel(layout, points, {
        highlighted,
        knn,
        glyphs: layout.space === "fusion" ? props.glyphs : undefined,
      }),
    );
  }
  if (props.groupLinks) {
    parts.push(renderGroupPolylines(props.groupLinks, layouts));
  }
  parts.push("</svg>");
  return parts.join("\n");
}
