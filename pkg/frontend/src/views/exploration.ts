/** Information-exploration view: demographic stripes, the laboratory radar
 *  with inner/outer reference circles, fixed-indicator stacked bars, the
 *  medical history (most recent first, as served), and the physical-exam
 *  line + stacked bar.
 */

import type { CaseResponse, IndicatorStatus, StripeDoc } from "../api.js";
import { polarPoint } from "../geometry.js";

const fmt = (v: number) => Number(v.toFixed(3));

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Stripe plot: color intensity encodes the per-bin patient count; the
 *  marker points at the current patient's bin. */
export function renderStripe(name: string, stripe: StripeDoc, width = 160, height = 16): string {
  const n = stripe.counts.length;
  const maxCount = Math.max(...stripe.counts, 1);
  const bin = width / n;
  const cells = stripe.counts
    .map((count, i) => {
      const current = i === stripe.currentBin ? ' data-current="true"' : "";
      return `<rect class="stripe-bin"${current} x="${fmt(i * bin)}" y="0" width="${fmt(
        bin,
      )}" height="${height}" fill="#4e79a7" fill-opacity="${fmt(0.15 + 0.85 * (count / maxCount))}"/>`;
    })
    .join("\n");
  const markerX = (stripe.currentBin + 0.5) * bin;
  return (
    `<svg class="stripe" data-name="${escapeHtml(name)}" viewBox="0 0 ${width} ${height + 8}" ` +
    `xmlns="http://www.w3.org/2000/svg">\n${cells}\n` +
    `<path class="stripe-marker" d="M ${fmt(markerX - 4)} ${height + 7} L ${fmt(markerX)} ${
      height + 1
    } L ${fmt(markerX + 4)} ${height + 7} Z" fill="#e45b7b"/>\n</svg>`
  );
}

/** Radar chart with the normal range drawn as inner (low) and outer (high)
 *  circles; red points mark the patient's normalized values. */
export function renderRadar(
  statuses: Record<string, IndicatorStatus>,
  category: string,
  radius = 80,
): string {
  const names = Object.keys(statuses)
    .filter((name) => statuses[name]!.category === category)
    .sort();
  const cx = radius + 30;
  const cy = radius + 20;
  const innerR = radius * 0.4; // normalized 0 (range low)
  const outerR = radius * 0.8; // normalized 1 (range high)
  const toR = (normalized: number) => innerR + (outerR - innerR) * normalized;
  const parts = [
    `<svg class="radar" data-category="${category}" viewBox="0 0 ${2 * cx} ${2 * cy}" xmlns="http://www.w3.org/2000/svg">`,
    `<circle class="range-low" cx="${cx}" cy="${cy}" r="${fmt(innerR)}" fill="none" stroke="#999"/>`,
    `<circle class="range-high" cx="${cx}" cy="${cy}" r="${fmt(outerR)}" fill="none" stroke="#999"/>`,
  ];
  const polygon: string[] = [];
  names.forEach((name, i) => {
    const angle = (360 * i) / names.length;
    const axisEnd = polarPoint(cx, cy, radius, angle);
    parts.push(
      `<line class="radar-axis" x1="${cx}" y1="${cy}" x2="${fmt(axisEnd.x)}" y2="${fmt(
        axisEnd.y,
      )}" stroke="#eee"/>`,
      `<text class="radar-label" x="${fmt(axisEnd.x)}" y="${fmt(axisEnd.y)}" font-size="7">${escapeHtml(
        name,
      )}</text>`,
    );
    const status = statuses[name]!;
    const point = polarPoint(cx, cy, toR(status.radar), angle);
    polygon.push(`${fmt(point.x)},${fmt(point.y)}`);
    const cls = status.status === "within" ? "radar-point" : "radar-point out-of-range";
    parts.push(
      `<circle class="${cls}" data-name="${escapeHtml(name)}" cx="${fmt(point.x)}" cy="${fmt(
        point.y,
      )}" r="2.4" fill="#e45b7b"/>`,
    );
  });
  if (polygon.length > 1) {
    parts.push(
      `<polygon class="radar-shape" points="${polygon.join(" ")}" fill="#e45b7b" fill-opacity="0.12" stroke="#e45b7b" stroke-width="0.7"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Stacked bar for one screening indicator: a dark stripe marks the normal
 *  range, an arrow marks the current patient's value. */
export function renderIndicatorBar(name: string, status: IndicatorStatus, width = 180): string {
  const lo = Math.min(status.low, status.value);
  const hi = Math.max(status.high, status.value);
  const pad = 0.1 * (hi - lo || 1);
  const min = lo - pad;
  const max = hi + pad;
  const toX = (v: number) => ((v - min) / (max - min)) * width;
  const height = 14;
  return [
    `<svg class="indicator-bar" data-name="${escapeHtml(name)}" viewBox="0 0 ${width} ${height + 12}" xmlns="http://www.w3.org/2000/svg">`,
    `<rect class="bar-track" x="0" y="0" width="${width}" height="${height}" fill="#eee"/>`,
    `<rect class="bar-range" x="${fmt(toX(status.low))}" y="0" width="${fmt(
      toX(status.high) - toX(status.low),
    )}" height="${height}" fill="#4e79a7" fill-opacity="0.55"/>`,
    `<path class="bar-arrow" data-status="${status.status}" d="M ${fmt(toX(status.value) - 4)} ${
      height + 11
    } L ${fmt(toX(status.value))} ${height + 2} L ${fmt(toX(status.value) + 4)} ${height + 11} Z" fill="${
      status.status === "within" ? "#333" : "#e45b7b"
    }"/>`,
    `<text class="bar-label" x="0" y="${height + 11}" font-size="7">${escapeHtml(name)} (${
      status.unit
    })</text>`,
    "</svg>",
  ].join("\n");
}

/** Exam line chart: items in catalog order, normal/abnormal as two levels;
 *  a stacked bar below counts items per exam kind. */
export function renderExamChart(caseResponse: CaseResponse, width = 420): string {
  const items = caseResponse.case.physicalExam;
  const height = 42;
  const step = items.length > 1 ? width / (items.length - 1) : 0;
  const points = items
    .map((item, i) => `${fmt(i * step)},${item.status === "abnormal" ? 8 : height - 8}`)
    .join(" ");
  const markers = items
    .map((item, i) => {
      const cls = item.status === "abnormal" ? "exam-point abnormal" : "exam-point";
      const y = item.status === "abnormal" ? 8 : height - 8;
      return (
        `<circle class="${cls}" data-name="${escapeHtml(item.name)}" data-area="${item.area}" ` +
        `cx="${fmt(i * step)}" cy="${y}" r="2.2"><title>${escapeHtml(item.name)}</title></circle>`
      );
    })
    .join("\n");
  const kinds = Object.entries(caseResponse.examSummary.perKind);
  const totalKinds = kinds.reduce((acc, [, count]) => acc + count, 0) || 1;
  let x = 0;
  const stack = kinds
    .map(([kind, count], i) => {
      const w = (width * count) / totalKinds;
      const rect = `<rect class="kind-bar" data-kind="${kind}" x="${fmt(x)}" y="${height + 6}" width="${fmt(
        w,
      )}" height="10" fill="${["#4e79a7", "#f28e2b", "#59a14f"][i % 3]}"/>`;
      x += w;
      return rect;
    })
    .join("\n");
  return [
    `<svg class="exam-chart" viewBox="0 0 ${width} ${height + 20}" xmlns="http://www.w3.org/2000/svg">`,
    `<polyline class="exam-line" points="${points}" fill="none" stroke="#999" stroke-width="0.8"/>`,
    markers,
    stack,
    "</svg>",
  ].join("\n");
}

/** Medical history: chief complaint first, then entries as served
 *  (most recent first). */
export function renderHistory(caseResponse: CaseResponse): string {
  const entries = caseResponse.case.historyEntries
    .map(
      (entry) =>
        `<li class="history-entry"><time>${entry.date}</time> ${escapeHtml(entry.text)}</li>`,
    )
    .join("\n");
  return (
    `<section class="history">` +
    `<p class="chief-complaint">${escapeHtml(caseResponse.case.chiefComplaint)}</p>` +
    `<ol class="history-entries">\n${entries}\n</ol></section>`
  );
}
