/** Mentions view: specialty/date filters, keyword ranking, text search. */

import type { CaseSummary, Page } from "../api.js";

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderKeywordList(keywords: { token: string; count: number }[]): string {
  const max = keywords.length > 0 ? keywords[0]!.count : 1;
  const rows = keywords
    .map(
      (kw) =>
        `<li class="keyword" data-token="${escapeHtml(kw.token)}">` +
        `<span class="bar" style="width:${Math.round((100 * kw.count) / max)}%"></span>` +
        `<span class="token">${escapeHtml(kw.token)}</span>` +
        `<span class="count">${kw.count}</span></li>`,
    )
    .join("\n");
  return `<ol class="keyword-list">\n${rows}\n</ol>`;
}

export function renderCaseList(page: Page<CaseSummary>, selected: string | null): string {
  const rows = page.items
    .map((item) => {
      const current = item.caseId === selected ? " selected" : "";
      return (
        `<li class="case-row${current}" data-case-id="${escapeHtml(item.caseId)}">` +
        `<span class="case-id">${escapeHtml(item.caseId)}</span>` +
        `<span class="date">${item.admitDate}</span>` +
        `<span class="complaint">${escapeHtml(item.chiefComplaint)}</span></li>`
      );
    })
    .join("\n");
  return `<ul class="case-list" data-total="${page.total}">\n${rows}\n</ul>`;
}
