/**
 * Agreement statistics panel.
 *
 * Values come from the service verbatim: every number is stringified
 * as received, never rounded or recomputed in the browser, so the
 * panel always matches what the analytics endpoints report.
 */

import type { StatsResponse } from './api.js';

export function formatValue(value: number | null | undefined): string {
  return value === null || value === undefined ? 'n/a' : String(value);
}

export interface StatsTable {
  coverage: string;
  reference: string;
  /** header row: annotator ids */
  annotators: string[];
  /** pairwise agreement matrix, row-major, already stringified */
  pairwiseRows: string[][];
  boundaryRows: { distance: string; frames: string; disagreeing: string }[];
}

export function statsToTable(stats: StatsResponse): StatsTable {
  return {
    coverage: formatValue(stats.unanimity_coverage),
    reference: stats.reference_annotator,
    annotators: stats.annotator_ids.slice(),
    pairwiseRows: stats.pairwise.map((row) => row.map((v) => formatValue(v))),
    boundaryRows: stats.boundary_profile.bins.map((bin) => ({
      distance: String(bin.distance),
      frames: String(bin.frames_at_distance),
      disagreeing: String(bin.disagreeing_frames),
    })),
  };
}

function appendRow(table: HTMLTableElement, cells: string[], header = false): void {
  const tr = document.createElement('tr');
  for (const text of cells) {
    const cell = document.createElement(header ? 'th' : 'td');
    cell.textContent = text;
    tr.appendChild(cell);
  }
  table.appendChild(tr);
}

export function renderStats(container: HTMLElement, stats: StatsResponse): void {
  const view = statsToTable(stats);
  container.textContent = '';

  const coverage = document.createElement('p');
  coverage.textContent = `Unanimity coverage: ${view.coverage}`;
  container.appendChild(coverage);

  const reference = document.createElement('p');
  reference.textContent = `Reference annotator: ${view.reference}`;
  container.appendChild(reference);

  const pairwise = document.createElement('table');
  pairwise.className = 'stats-table';
  appendRow(pairwise, ['', ...view.annotators], true);
  view.pairwiseRows.forEach((row, i) => {
    appendRow(pairwise, [view.annotators[i], ...row]);
  });
  container.appendChild(pairwise);

  const boundary = document.createElement('table');
  boundary.className = 'stats-table';
  appendRow(boundary, ['distance', 'frames', 'disagreeing'], true);
  for (const row of view.boundaryRows) {
    appendRow(boundary, [row.distance, row.frames, row.disagreeing]);
  }
  container.appendChild(boundary);
}
