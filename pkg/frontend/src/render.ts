/** HTML-string renderers; pure functions so they can be tested without a DOM. */

import type { BusyIntervalDto, ChatEntryDto, ConstraintDto, SuggestionDto } from './types.js';
import { dayLabel, minuteLabel, parseIso, totalMinutes } from './time.js';

const DAY_START = 8 * 60;
const DAY_END = 18 * 60;
const CELL_MINUTES = 30;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderSuggestionCards(suggestions: SuggestionDto[], status: string): string {
  if (suggestions.length === 0) {
    return '<p class="empty">No suggestions yet.</p>';
  }
  const disabled = status === 'open' ? '' : ' disabled';
  const cards = suggestions.map((s, index) => {
    const satisfied = s.satisfied
      .map((text) => `<li class="satisfied">${escapeHtml(text)}</li>`)
      .join('');
    const unsatisfied = s.unsatisfied
      .map((text) => `<li class="unsatisfied">${escapeHtml(text)}</li>`)
      .join('');
    const lists = satisfied + unsatisfied;
    return (
      `<div class="card" data-suggestion="${index}">` +
      `<div class="slot">${escapeHtml(s.start)} &rarr; ${escapeHtml(s.end)}</div>` +
      `<div class="explanation">${escapeHtml(s.explanation)}</div>` +
      (lists ? `<ul class="constraint-status">${lists}</ul>` : '') +
      `<button class="schedule" data-index="${index}"${disabled}>Schedule</button>` +
      `</div>`
    );
  });
  return cards.join('');
}

export function renderConstraintPanel(constraints: ConstraintDto[]): string {
  if (constraints.length === 0) {
    return '<p class="empty">No preferences recorded.</p>';
  }
  const rows = constraints.map(
    (c) =>
      `<li data-constraint="${escapeHtml(c.id)}">` +
      `<span class="priority">${c.rank + 1}.</span> ` +
      `<span class="nl">${escapeHtml(c.nl_text)}</span> ` +
      `<code>${escapeHtml(c.dsl_source)}</code>` +
      `</li>`
  );
  return `<ol class="constraints">${rows.join('')}</ol>`;
}

export function renderChat(chat: ChatEntryDto[]): string {
  const rows = chat.map(
    (entry) =>
      `<div class="chat-entry ${entry.speaker}">` +
      `<span class="speaker">${escapeHtml(entry.speaker)}</span>` +
      `<pre class="text">${escapeHtml(entry.text)}</pre>` +
      `</div>`
  );
  return rows.join('');
}

interface CellSpan {
  startMin: number;
  endMin: number;
  label: string;
}

function spansOf(intervals: BusyIntervalDto[], label: string): CellSpan[] {
  return intervals.map((b) => ({
    startMin: totalMinutes(parseIso(b.start)),
    endMin: totalMinutes(parseIso(b.end)),
    label,
  }));
}

function overlapping(spans: CellSpan[], cellStart: number, cellEnd: number): CellSpan[] {
  return spans.filter((s) => s.startMin < cellEnd && s.endMin > cellStart);
}

/**
 * A Monday-to-Friday grid of half-hour cells covering business hours.
 * Busy intervals from any listed person shade a cell; suggestion slots
 * outline it as candidates. Both can apply to the same cell.
 */
export function renderCalendar(
  weekStart: number,
  busyByPerson: Record<string, BusyIntervalDto[]>,
  highlights: SuggestionDto[]
): string {
  const busySpans = Object.entries(busyByPerson).flatMap(([person, intervals]) =>
    spansOf(intervals, person)
  );
  const candidateSpans = highlights.map((s) => ({
    startMin: totalMinutes(parseIso(s.start)),
    endMin: totalMinutes(parseIso(s.end)),
    label: 'candidate',
  }));

  const days = [0, 1, 2, 3, 4].map((offset) => weekStart + offset);
  const header =
    '<tr><th></th>' + days.map((d) => `<th>${escapeHtml(dayLabel(d))}</th>`).join('') + '</tr>';

  const rows: string[] = [];
  for (let minute = DAY_START; minute < DAY_END; minute += CELL_MINUTES) {
    const cells = days.map((day) => {
      const cellStart = day * 24 * 60 + minute;
      const cellEnd = cellStart + CELL_MINUTES;
      const busyHere = overlapping(busySpans, cellStart, cellEnd);
      const classes: string[] = [];
      if (busyHere.length > 0) {
        classes.push('busy');
      }
      if (overlapping(candidateSpans, cellStart, cellEnd).length > 0) {
        classes.push('candidate');
      }
      const classAttr = classes.length > 0 ? ` class="${classes.join(' ')}"` : '';
      const people = busyHere.map((s) => s.label).join(', ');
      const titleAttr = people ? ` title="${escapeHtml(people)}"` : '';
      return `<td data-cell="${day}:${minute}"${classAttr}${titleAttr}></td>`;
    });
    rows.push(`<tr><th>${minuteLabel(minute)}</th>${cells.join('')}</tr>`);
  }

  return `<table class="calendar">${header}${rows.join('')}</table>`;
}
