import { beforeAll, describe, expect, it } from 'vitest';
import type { TrackRle } from '../src/api.js';
import { BLANK_CLASS, buildColorMap } from '../src/palette.js';
import {
  clampViewport,
  countBlankRuns,
  frameToX,
  fullView,
  pan,
  renderTimeline,
  spanToRect,
  tracksShareLength,
  visibleFrames,
  xToFrame,
  zoom,
  type Viewport,
} from '../src/timeline.js';
import { collect, installDocumentStub, makeElement } from './dom-stub.js';

function rle(annotator: string, segments: [number, number, number | null][]): TrackRle {
  const frameCount = segments[segments.length - 1][1] + 1;
  return {
    annotator_id: annotator,
    frame_count: frameCount,
    provenance: 'annotator',
    segments: segments.map(([start_frame, end_frame, label]) => ({
      start_frame,
      end_frame,
      label,
    })),
  };
}

const TAXONOMY = {
  surgery_kind: 'test',
  phases: [0, 1, 2].map((id) => ({ id, name: `p${id}`, kind: 'surgical' })),
};

describe('viewport geometry', () => {
  const view: Viewport = { startFrame: 0, endFrame: 99, pixelWidth: 1000 };

  it('maps frames to pixels affinely', () => {
    expect(frameToX(view, 0)).toBe(0);
    expect(frameToX(view, 50)).toBe(500);
    expect(frameToX(view, 100)).toBe(1000);
    // affine: equal frame steps give equal pixel steps
    const step = frameToX(view, 13) - frameToX(view, 12);
    expect(frameToX(view, 77) - frameToX(view, 76)).toBeCloseTo(step, 12);
  });

  it('inverts pixels back to frames', () => {
    for (const frame of [0, 1, 49, 99]) {
      expect(xToFrame(view, frameToX(view, frame) + 5)).toBe(frame);
    }
  });

  it('converts frame spans to clipped pixel rects', () => {
    expect(spanToRect(view, 10, 19)).toEqual({ left: 100, width: 100 });
    const clipped = spanToRect({ ...view, startFrame: 50 }, 0, 59);
    expect(clipped).toEqual({ left: 0, width: 200 });
    expect(spanToRect({ ...view, startFrame: 50 }, 0, 49)).toBeNull();
  });

  it('zooms in around an anchor and clamps to the data', () => {
    const zoomed = zoom(view, 2, 50, 100);
    expect(visibleFrames(zoomed)).toBe(50);
    expect(zoomed.startFrame).toBeLessThanOrEqual(50);
    expect(zoomed.endFrame).toBeGreaterThanOrEqual(50);
    // zooming out past the full range settles on the full range
    const out = zoom(zoomed, 0.01, 50, 100);
    expect(out).toEqual(fullView(100, 1000));
  });

  it('never zooms below a single frame', () => {
    let v = view;
    for (let i = 0; i < 12; i++) v = zoom(v, 2, 30, 100);
    expect(visibleFrames(v)).toBe(1);
    expect(v.startFrame).toBe(30);
  });

  it('pans within bounds', () => {
    const half: Viewport = { startFrame: 20, endFrame: 39, pixelWidth: 1000 };
    expect(pan(half, 10, 100).startFrame).toBe(30);
    expect(pan(half, -100, 100).startFrame).toBe(0);
    expect(pan(half, 1000, 100).endFrame).toBe(99);
    expect(visibleFrames(pan(half, 1000, 100))).toBe(20);
  });

  it('clamps nonsense viewports to valid ones', () => {
    const fixed = clampViewport({ startFrame: 95, endFrame: 300, pixelWidth: 10 }, 100);
    expect(fixed.startFrame).toBeGreaterThanOrEqual(0);
    expect(fixed.endFrame).toBeLessThanOrEqual(99);
  });
});

describe('ribbon rendering', () => {
  beforeAll(() => {
    installDocumentStub();
  });

  const colors = buildColorMap(TAXONOMY);

  it('draws one row per track plus the draft, aligned to one axis', () => {
    const a = rle('ann1', [[0, 4, 0], [5, 9, 1]]);
    const b = rle('ann2', [[0, 4, 0], [5, 9, 1]]);
    const draft = rle('consensus', [[0, 4, 0], [5, 9, 1]]);
    const container = makeElement('div');
    renderTimeline(
      container as unknown as HTMLElement,
      [
        { name: 'ann1', track: a },
        { name: 'ann2', track: b },
        { name: 'consensus', track: draft },
      ],
      fullView(10, 100),
      colors,
    );
    const rows = collect(container, 'ribbon-row');
    expect(rows.length).toBe(3);
    // identical tracks produce visually identical rows
    const spans = rows.map((row) =>
      collect(row, 'seg').map((seg) => `${seg.style.left}|${seg.style.width}|${seg.style.background ?? ''}`));
    expect(spans[1]).toEqual(spans[0]);
    expect(collect(container, BLANK_CLASS).length).toBe(0);
  });

  it('renders a blank draft run as a hatched gap, never a phase color', () => {
    const draft = rle('consensus', [[0, 3, 0], [4, 4, null], [5, 9, 1]]);
    const container = makeElement('div');
    renderTimeline(
      container as unknown as HTMLElement,
      [{ name: 'consensus', track: draft }],
      fullView(10, 100),
      colors,
    );
    const hatched = collect(container, BLANK_CLASS);
    expect(hatched.length).toBe(1);
    expect(hatched[0].style.background).toBeUndefined();
    expect(hatched[0].style.left).toBe('40px');
    expect(hatched[0].style.width).toBe('10px');
  });

  it('counts blank runs for the gap badge', () => {
    const draft = rle('consensus', [[0, 3, 0], [4, 4, null], [5, 7, 1], [8, 9, null]]);
    expect(countBlankRuns(draft.segments)).toBe(2);
    expect(tracksShareLength([draft, rle('x', [[0, 9, 0]])])).toBe(true);
  });

  it('shows an error banner and renders nothing else on mismatched lengths', () => {
    const container = makeElement('div');
    renderTimeline(
      container as unknown as HTMLElement,
      [
        { name: 'ann1', track: rle('ann1', [[0, 9, 0]]) },
        { name: 'ann2', track: rle('ann2', [[0, 7, 0]]) },
      ],
      fullView(10, 100),
      colors,
    );
    expect(container.children.length).toBe(1);
    expect(container.children[0].className).toBe('error-banner');
    expect(collect(container, 'ribbon-row').length).toBe(0);
  });

  it('refuses to paint a phase id missing from the taxonomy', () => {
    const container = makeElement('div');
    expect(() =>
      renderTimeline(
        container as unknown as HTMLElement,
        [{ name: 'ann1', track: rle('ann1', [[0, 9, 42]]) }],
        fullView(10, 100),
        colors,
      ),
    ).toThrow(/taxonomy/);
  });
});
