/** Detail view: the raw image with thumbnails, parallel disc-signal axes
 *  with density stripes, practice-phase drawing overlays, and the
 *  learning-phase reveal (masks plus force-laid-out diagnosis labels).
 */

import type { CaseDetail, LayoutResult } from "../api.js";
import type { DrawnShape } from "../state.js";

const fmt = (v: number) => Number(v.toFixed(3));

export const IMAGE_VIEW = { width: 256, height: 256 };

export function renderThumbnails(imageRefs: string[], currentRef: string): string {
  const items = imageRefs
    .map((ref) => {
      const current = ref === currentRef ? " current" : "";
      return `<img class="thumbnail${current}" src="${ref}" alt="${ref}"/>`;
    })
    .join("\n");
  return `<div class="thumbnails">\n${items}\n</div>`;
}

/** Parallel axes: one group of min/mean/max axes per disc region, the
 *  patient polyline over normalized values, density stripes behind. */
export function renderSignalAxes(detail: CaseDetail): string {
  const axisGap = 34;
  const statOrder = ["min", "mean", "max"] as const;
  const height = 120;
  const parts = [
    `<svg class="signal-axes" viewBox="0 0 ${detail.discSignals.length * 3 * axisGap + 20} ${
      height + 30
    }" xmlns="http://www.w3.org/2000/svg">`,
  ];
  let axisIndex = 0;
  for (const signal of detail.discSignals) {
    const polyline: string[] = [];
    for (const stat of statOrder) {
      const x = 10 + axisIndex * axisGap;
      axisIndex += 1;
      const density = signal.density[stat];
      if (density) {
        const maxCount = Math.max(...density.counts, 1);
        density.counts.forEach((count, bin) => {
          const y = height - ((bin + 1) / density.counts.length) * height;
          const h = height / density.counts.length;
          parts.push(
            `<rect class="density" x="${fmt(x - 4)}" y="${fmt(y)}" width="8" height="${fmt(
              h,
            )}" fill="#4e79a7" fill-opacity="${fmt(0.45 * (count / maxCount))}"/>`,
          );
        });
      }
      parts.push(
        `<line class="axis" x1="${x}" y1="0" x2="${x}" y2="${height}" stroke="#bbb"/>`,
        `<text class="axis-label" x="${x}" y="${height + 12}" text-anchor="middle">${
          signal.region
        } ${stat}</text>`,
      );
      const normalized = signal.normalized ? signal.normalized[stat] : 0.5;
      polyline.push(`${x},${fmt(height - normalized * height)}`);
    }
    const flagged = signal.protrusionFlagged ? " flagged" : "";
    parts.push(
      `<polyline class="patient-line${flagged}" data-region="${signal.region}" points="${polyline.join(
        " ",
      )}" fill="none" stroke="${signal.protrusionFlagged ? "#e45b7b" : "#333"}" stroke-width="1.5"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Practice phase: raw image plus the user's in-progress drawings. */
export function renderPracticeOverlay(detail: CaseDetail, shapes: DrawnShape[]): string {
  const parts = [
    `<svg class="practice-overlay" viewBox="0 0 ${IMAGE_VIEW.width} ${IMAGE_VIEW.height}" xmlns="http://www.w3.org/2000/svg">`,
    `<image href="${detail.imageRefs[0] ?? ""}" width="${IMAGE_VIEW.width}" height="${IMAGE_VIEW.height}"/>`,
  ];
  for (const shape of shapes) {
    const [x0, y0, x1, y1] = shape.bbox;
    parts.push(
      `<rect class="drawn-shape" x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(x1 - x0)}" height="${fmt(
        y1 - y0,
      )}" fill="none" stroke="#e45b7b" stroke-width="1.5"/>`,
      `<title>${shape.label}: ${shape.note}</title>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Learning phase: one mask per detection over the image, plus the
 *  force-laid-out diagnosis labels returned by the layout service.
 *  Layout positions are in layout units around the origin; the image
 *  half-extents used in the request define the mapping back to pixels.
 */
export function renderLearningOverlay(
  detail: CaseDetail,
  layout: LayoutResult,
  imageHalfExtents: [number, number],
): string {
  const cx = IMAGE_VIEW.width / 2;
  const cy = IMAGE_VIEW.height / 2;
  const scaleX = cx / imageHalfExtents[0];
  const scaleY = cy / imageHalfExtents[1];
  const parts = [
    `<svg class="learning-overlay" viewBox="${fmt(-cx)} ${fmt(-cy)} ${2 * IMAGE_VIEW.width} ${
      2 * IMAGE_VIEW.height
    }" xmlns="http://www.w3.org/2000/svg">`,
    `<image href="${detail.imageRefs[0] ?? ""}" x="0" y="0" width="${IMAGE_VIEW.width}" height="${
      IMAGE_VIEW.height
    }"/>`,
  ];
  detail.detections.forEach((det, index) => {
    const [x0, y0, x1, y1] = det.bbox;
    parts.push(
      `<rect class="mask" data-detection="${index}" x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(
        x1 - x0,
      )}" height="${fmt(y1 - y0)}" fill="#f28e2b" fill-opacity="0.35" stroke="#f28e2b"/>`,
    );
    const position = layout.positions[`det-${index}`];
    if (position) {
      const [lx, ly] = position;
      parts.push(
        `<text class="aligned-label" data-detection="${index}" x="${fmt(cx + lx * scaleX)}" y="${fmt(
          cy + ly * scaleY,
        )}" text-anchor="middle">${det.label}</text>`,
      );
    }
  });
  parts.push("</svg>");
  return parts.join("\n");
}

/** Linked diagnosis text with the detection-backed phrases wrapped in marks. */
export function renderLinkedText(diagnosisText: string, detail: CaseDetail): string {
  const spans = [...detail.links].sort((a, b) => a.phraseSpan[0] - b.phraseSpan[0]);
  const parts: string[] = [];
  let cursor = 0;
  for (const link of spans) {
    const [start, end] = link.phraseSpan;
    if (start < cursor) continue; // overlapping links keep the first
    parts.push(escapeHtml(diagnosisText.slice(cursor, start)));
    parts.push(
      `<mark class="phrase-link" data-detection="${link.detectionIndex}">${escapeHtml(
        diagnosisText.slice(start, end),
      )}</mark>`,
    );
    cursor = end;
  }
  parts.push(escapeHtml(diagnosisText.slice(cursor)));
  return `<p class="diagnosis-text">${parts.join("")}</p>`;
}

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
