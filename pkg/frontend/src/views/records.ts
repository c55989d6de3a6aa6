/** Record view: saved analysis cards with edit affordances and export links. */

import type { AnalysisRecord } from "../api.js";

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderRecordCard(record: AnalysisRecord): string {
  const notes = record.regionNotes
    .map(
      (note) =>
        `<li class="region-note">${escapeHtml(note.label)}: ${escapeHtml(note.note)}</li>`,
    )
    .join("\n");
  return [
    `<article class="record-card" data-record-id="${record.recordId}" data-case-id="${escapeHtml(
      record.caseId,
    )}">`,
    `<header><input class="record-summary" value="${escapeHtml(record.summary)}"/>` +
      `<time>${record.updatedAt}</time></header>`,
    `<textarea class="record-comments">${escapeHtml(record.comments)}</textarea>`,
    `<ul class="region-notes">\n${notes}\n</ul>`,
    `<footer><button class="open-case" data-case-id="${escapeHtml(record.caseId)}">open</button></footer>`,
    "</article>",
  ].join("\n");
}

export function renderRecordView(records: AnalysisRecord[], exportJsonUrl: string, exportCsvUrl: string): string {
  const cards = records.map(renderRecordCard).join("\n");
  return [
    `<section class="record-view">`,
    `<nav class="export"><a href="${exportJsonUrl}" download>export json</a>` +
      `<a href="${exportCsvUrl}" download>export csv</a></nav>`,
    cards,
    "</section>",
  ].join("\n");
}
