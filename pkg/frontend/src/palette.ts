/**
 * Fixed phase color palette.
 *
 * Colors are assigned by ascending phase id, so the same project
 * renders identically across sessions and screenshots stay comparable
 * no matter how the payload happens to order the phase list.
 * Unresolved (blank) ranges never take a phase color; they render with
 * the hatched style from the stylesheet.
 */

import type { Taxonomy } from './api.js';

/** 28 visually distinct colors; enough for the largest builtin taxonomy. */
export const PALETTE: readonly string[] = [
  '#4e79a7', '#f28e2b', '#e15759', '#76b7b2', '#59a14f', '#edc948',
  '#b07aa1', '#ff9da7', '#9c755f', '#bab0ac', '#1f77b4', '#ff7f0e',
  '#2ca02c', '#d62728', '#9467bd', '#8c564b', '#e377c2', '#7f7f7f',
  '#bcbd22', '#17becf', '#aec7e8', '#ffbb78', '#98df8a', '#ff9896',
  '#c5b0d5', '#c49c94', '#f7b6d2', '#dbdb8d',
];

export const BLANK_CLASS = 'blank-hatch';

/** Bijective phase id -> color map for one taxonomy. */
export function buildColorMap(taxonomy: Taxonomy): Map<number, string> {
  if (taxonomy.phases.length > PALETTE.length) {
    throw new Error(
      `taxonomy has ${taxonomy.phases.length} phases, palette has ${PALETTE.length}`,
    );
  }
  const map = new Map<number, string>();
  const byId = [...taxonomy.phases].sort((a, b) => a.id - b.id);
  byId.forEach((phase, index) => {
    map.set(phase.id, PALETTE[index]);
  });
  return map;
}

export function colorForPhase(
  colors: Map<number, string>,
  phaseId: number,
): string {
  const color = colors.get(phaseId);
  if (color === undefined) {
    throw new Error(`phase ${phaseId} is not in the taxonomy`);
  }
  return color;
}
