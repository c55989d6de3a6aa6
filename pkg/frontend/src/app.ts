/** Application controller: owns the data flow between the API client, the
 *  selection state, and the string renderers. All methods return markup so
 *  the controller is testable without a DOM; index.ts mounts the strings.
 */

import {
  ApiClient,
  type CaseDetail,
  type GlyphMetrics,
  type GroupLinks,
  type LayoutResult,
  type ScatterPoint,
  type Space,
} from "./api.js";
import { lassoSelect, type Vertex } from "./lasso.js";
import { SelectionState } from "./state.js";
import { IMAGE_VIEW, renderLearningOverlay, renderPracticeOverlay } from "./views/detail.js";
import { renderEmbeddingView } from "./views/embedding.js";

/** Text extents for layout requests. In the browser this is backed by
 *  canvas measureText; the default approximates from character count so the
 *  controller also runs headless. Units are layout units (image = 2x1.6). */
export type MeasureText = (label: string) => [number, number];

export const approximateMeasure: MeasureText = (label) => {
  const width = Math.max(0.18, 0.042 * label.length);
  return [width / 2 + 0.04, 0.07];
};

export const LAYOUT_IMAGE_HALF: [number, number] = [1.0, 0.8];

export class AppController {
  readonly state = new SelectionState();

  private coordsCache = new Map<Space, ScatterPoint[]>();
  private glyphCache = new Map<string, GlyphMetrics>();
  private detailCache = new Map<string, CaseDetail>();
  private groupLinks: GroupLinks | null = null;
  private learningLayout: LayoutResult | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly measure: MeasureText = approximateMeasure,
  ) {}

  async loadCoords(space: Space): Promise<ScatterPoint[]> {
    const cached = this.coordsCache.get(space);
    if (cached) return cached;
    const page = await this.api.coords(space);
    this.coordsCache.set(space, page.items);
    return page.items;
  }

  async loadAllCoords(): Promise<Record<Space, ScatterPoint[]>> {
    const [image, text, indicator, fusion] = await Promise.all([
      this.loadCoords("image"),
      this.loadCoords("text"),
      this.loadCoords("indicator"),
      this.loadCoords("fusion"),
    ]);
    return { image, text, indicator, fusion };
  }

  async loadGlyph(caseId: string): Promise<GlyphMetrics> {
    const key = `${caseId}:${this.state.k}`;
    const cached = this.glyphCache.get(key);
    if (cached) return cached;
    const metrics = await this.api.glyph(caseId, this.state.k);
    this.glyphCache.set(key, metrics);
    return metrics;
  }

  async loadDetail(caseId: string): Promise<CaseDetail> {
    const cached = this.detailCache.get(caseId);
    if (cached) return cached;
    const detail = await this.api.caseDetail(caseId);
    this.detailCache.set(caseId, detail);
    return detail;
  }

  /** Lasso over the fusion panel: resolves the enclosed case ids, stores
   *  them, and issues exactly one group-links request for the polylines. */
  async lassoFusion(polygon: Vertex[]): Promise<string[]> {
    const fusion = await this.loadCoords("fusion");
    const ids = lassoSelect(fusion, polygon);
    this.state.setLasso(ids);
    this.groupLinks = ids.length > 0 ? await this.api.groupLinks(ids) : null;
    return ids;
  }

  async selectCase(caseId: string): Promise<void> {
    this.state.selectCase(caseId);
    this.learningLayout = null;
  }

  /** Render the embedding view (all four spaces, fusion glyphs for the
   *  selection + lasso group, KNN circles for the selected case). */
  async renderEmbedding(): Promise<string> {
    const coords = await this.loadAllCoords();
    const glyphIds = new Set(this.state.lassoIds);
    if (this.state.selectedCase) glyphIds.add(this.state.selectedCase);
    const glyphs = new Map<string, GlyphMetrics>();
    for (const id of glyphIds) {
      glyphs.set(id, await this.loadGlyph(id));
    }
    const selected = this.state.selectedCase ? glyphs.get(this.state.selectedCase) ?? null : null;
    return renderEmbeddingView({
      coords,
      glyphs,
      selected,
      groupLinks: this.groupLinks,
      lassoIds: this.state.lassoIds,
    });
  }

  /** Flip practice/learning. Entering the learning phase fetches the case's
   *  alignment artifacts and solves the label layout server-side (one POST
   *  per entry; the physics never runs client-side). */
  async togglePhase(): Promise<string> {
    if (!this.state.selectedCase) {
      throw new Error("cannot toggle phase: no case selected");
    }
    const phase = this.state.togglePhase();
    const detail = await this.loadDetail(this.state.selectedCase);
    if (phase === "practice") {
      this.learningLayout = null;
      return renderPracticeOverlay(detail, this.state.drawnShapes);
    }
    this.learningLayout = await this.api.solveLayout({
      texts: detail.detections.map((det, index) => ({
        id: `det-${index}`,
        label: det.label,
        halfExtents: this.measure(det.label),
      })),
      image: { halfExtents: LAYOUT_IMAGE_HALF },
    });
    return renderLearningOverlay(detail, this.learningLayout, LAYOUT_IMAGE_HALF);
  }

  async renderDetail(): Promise<string> {
    if (!this.state.selectedCase) return "";
    const detail = await this.loadDetail(this.state.selectedCase);
    if (this.state.phase === "learning" && this.learningLayout) {
      return renderLearningOverlay(detail, this.learningLayout, LAYOUT_IMAGE_HALF);
    }
    return renderPracticeOverlay(detail, this.state.drawnShapes);
  }

  imageViewSize(): { width: number; height: number } {
    return IMAGE_VIEW;
  }
}
