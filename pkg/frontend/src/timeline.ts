/**
 * Timeline ribbon geometry and rendering.
 *
 * One colored ribbon per annotator plus one for the consensus draft, all
 * sharing a frame axis. Pixel spans map affinely to frame ranges; zoom
 * and pan only change the visible frame window, never the data.
 */

import type { RleSegment, TrackRle } from './api.js';
import { BLANK_CLASS } from './palette.js';

export interface Viewport {
  /** first visible frame (inclusive) */
  startFrame: number;
  /** last visible frame (inclusive) */
  endFrame: number;
  /** width of the drawing area in pixels */
  pixelWidth: number;
}

export function visibleFrames(view: Viewport): number {
  return view.endFrame - view.startFrame + 1;
}

/** Left pixel edge of a frame under the affine frame -> pixel map. */
export function frameToX(view: Viewport, frame: number): number {
  return ((frame - view.startFrame) / visibleFrames(view)) * view.pixelWidth;
}

/** Frame under a pixel x; clamped to the visible window. */
export function xToFrame(view: Viewport, x: number): number {
  const raw = view.startFrame + (x / view.pixelWidth) * visibleFrames(view);
  return Math.min(view.endFrame, Math.max(view.startFrame, Math.floor(raw)));
}

export interface PixelSpan {
  left: number;
  width: number;
}

/** Pixel span of an inclusive frame range, clipped to the viewport. */
export function spanToRect(
  view: Viewport,
  startFrame: number,
  endFrame: number,
): PixelSpan | null {
  const start = Math.max(startFrame, view.startFrame);
  const end = Math.min(endFrame, view.endFrame);
  if (end < start) return null;
  const left = frameToX(view, start);
  const right = frameToX(view, end + 1);
  return { left, width: right - left };
}

export function clampViewport(view: Viewport, frameCount: number): Viewport {
  const span = Math.max(1, Math.min(visibleFrames(view), frameCount));
  let start = Math.max(0, Math.min(view.startFrame, frameCount - span));
  return { startFrame: start, endFrame: start + span - 1, pixelWidth: view.pixelWidth };
}

/** Zoom by a factor around an anchor frame; factor > 1 zooms in. */
export function zoom(
  view: Viewport,
  factor: number,
  anchorFrame: number,
  frameCount: number,
): Viewport {
  const span = Math.max(1, Math.round(visibleFrames(view) / factor));
  const ratio = (anchorFrame - view.startFrame) / visibleFrames(view);
  const start = Math.round(anchorFrame - ratio * span);
  return clampViewport(
    { startFrame: start, endFrame: start + span - 1, pixelWidth: view.pixelWidth },
    frameCount,
  );
}

export function pan(view: Viewport, deltaFrames: number, frameCount: number): Viewport {
  return clampViewport(
    {
      startFrame: view.startFrame + deltaFrames,
      endFrame: view.endFrame + deltaFrames,
      pixelWidth: view.pixelWidth,
    },
    frameCount,
  );
}

export function fullView(frameCount: number, pixelWidth: number): Viewport {
  return { startFrame: 0, endFrame: Math.max(0, frameCount - 1), pixelWidth };
}

/** All ribbons must cover the same frame count to share an axis. */
export function tracksShareLength(tracks: TrackRle[]): boolean {
  return tracks.every((t) => t.frame_count === tracks[0].frame_count);
}

export function countBlankRuns(segments: RleSegment[]): number {
  return segments.filter((s) => s.label === null).length;
}

// --- DOM rendering ----------------------------------------------------------

export interface RibbonRow {
  name: string;
  track: TrackRle;
}

function renderRibbon(
  row: HTMLElement,
  track: TrackRle,
  view: Viewport,
  colors: Map<number, string>,
): void {
  for (const segment of track.segments) {
    const rect = spanToRect(view, segment.start_frame, segment.end_frame);
    if (rect === null) continue;
    const div = document.createElement('div');
    div.className = segment.label === null ? `seg ${BLANK_CLASS}` : 'seg';
    if (segment.label !== null) {
      const color = colors.get(segment.label);
      if (color === undefined) {
        throw new Error(`phase ${segment.label} is not in the taxonomy`);
      }
      div.style.background = color;
    }
    div.style.left = `${rect.left}px`;
    div.style.width = `${rect.width}px`;
    div.title =
      `${segment.start_frame}..${segment.end_frame} ` +
      (segment.label === null ? '(blank)' : `phase ${segment.label}`);
    row.appendChild(div);
  }
}

/**
 * Render all ribbons into the container, annotators first, the draft
 * last. Mismatched track lengths render an error banner and nothing
 * else: a partially drawn timeline would misalign the shared axis.
 */
export function renderTimeline(
  container: HTMLElement,
  rows: RibbonRow[],
  view: Viewport,
  colors: Map<number, string>,
): void {
  container.textContent = '';
  if (rows.length === 0) return;
  if (!tracksShareLength(rows.map((r) => r.track))) {
    const banner = document.createElement('div');
    banner.className = 'error-banner';
    banner.textContent = 'tracks disagree on frame count; upload a fix and re-run consensus';
    container.appendChild(banner);
    return;
  }
  for (const { name, track } of rows) {
    const label = document.createElement('div');
    label.className = 'ribbon-label';
    label.textContent = name;
    const ribbon = document.createElement('div');
    ribbon.className = 'ribbon';
    ribbon.style.width = `${view.pixelWidth}px`;
    renderRibbon(ribbon, track, view, colors);
    const wrapper = document.createElement('div');
    wrapper.className = 'ribbon-row';
    wrapper.appendChild(label);
    wrapper.appendChild(ribbon);
    container.appendChild(wrapper);
  }
}
