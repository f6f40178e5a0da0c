import { describe, expect, it } from 'vitest';
import type { StatsResponse } from '../src/api.js';
import { formatValue, statsToTable } from '../src/stats.js';

const STATS: StatsResponse = {
  annotator_ids: ['ann1', 'ann2', 'ann3'],
  pairwise: [
    [1, 0.8133333333333334, 0.7583333333333333],
    [0.8133333333333334, 1, 0.9049999999999999],
    [0.7583333333333333, 0.9049999999999999, 1],
  ],
  unanimity_coverage: 0.7416666666666667,
  reference_annotator: 'ann1',
  boundary_profile: {
    max_distance: 120,
    bins: [
      { distance: 0, frames_at_distance: 6, disagreeing_frames: 4 },
      { distance: 1, frames_at_distance: 6, disagreeing_frames: 1 },
    ],
  },
};

describe('stats panel', () => {
  it('shows every number exactly as the service sent it', () => {
    const table = statsToTable(STATS);
    expect(table.coverage).toBe('0.7416666666666667');
    expect(table.pairwiseRows[0][1]).toBe('0.8133333333333334');
    expect(table.pairwiseRows[2][1]).toBe('0.9049999999999999');
    // full float text survives: nothing was rounded for display
    for (let i = 0; i < STATS.pairwise.length; i++) {
      for (let j = 0; j < STATS.pairwise[i].length; j++) {
        expect(table.pairwiseRows[i][j]).toBe(String(STATS.pairwise[i][j]));
      }
    }
  });

  it('keeps axis order aligned with annotator ids', () => {
    const table = statsToTable(STATS);
    expect(table.annotators).toEqual(['ann1', 'ann2', 'ann3']);
    expect(table.reference).toBe('ann1');
    expect(table.pairwiseRows.length).toBe(3);
  });

  it('mirrors boundary bins without aggregation', () => {
    const table = statsToTable(STATS);
    expect(table.boundaryRows).toEqual([
      { distance: '0', frames: '6', disagreeing: '4' },
      { distance: '1', frames: '6', disagreeing: '1' },
    ]);
  });

  it('renders missing values as n/a', () => {
    expect(formatValue(null)).toBe('n/a');
    expect(formatValue(0)).toBe('0');
  });
});
