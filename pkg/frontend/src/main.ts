/**
 * Inspector application shell.
 *
 * Wires the API client, timeline ribbons, blank-resolution queue, and
 * statistics panel to the page. All label arithmetic happens on the
 * server; this module only moves payloads between widgets.
 */

import { ApiClient, ApiError } from './api.js';
import type { BlankItem, Taxonomy, TrackRle } from './api.js';
import { buildColorMap } from './palette.js';
import {
  fullView,
  pan,
  renderTimeline,
  visibleFrames,
  zoom,
  type RibbonRow,
  type Viewport,
} from './timeline.js';
import { InspectorQueue, type PendingSubmission } from './queue.js';
import { mapKey } from './keyboard.js';
import { renderStats } from './stats.js';

const api = new ApiClient('');

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

const projectSelect = el<HTMLSelectElement>('project-select');
const caseSelect = el<HTMLSelectElement>('case-select');
const consensusBtn = el<HTMLButtonElement>('consensus-btn');
const timelineBox = el<HTMLElement>('timeline');
const zoomInBtn = el<HTMLButtonElement>('zoom-in');
const zoomOutBtn = el<HTMLButtonElement>('zoom-out');
const panLeftBtn = el<HTMLButtonElement>('pan-left');
const panRightBtn = el<HTMLButtonElement>('pan-right');
const zoomResetBtn = el<HTMLButtonElement>('zoom-reset');
const queueBox = el<HTMLElement>('queue');
const otherPanel = el<HTMLElement>('other-panel');
const otherInput = el<HTMLInputElement>('other-input');
const exportLink = el<HTMLAnchorElement>('export-link');
const statsBox = el<HTMLElement>('stats');
const banner = el<HTMLElement>('banner');

interface CaseState {
  project: string;
  caseId: string;
  taxonomy: Taxonomy;
  colors: Map<number, string>;
  tracks: TrackRle[];
  draft: TrackRle | null;
  frameCount: number;
  view: Viewport;
  queue: InspectorQueue;
}

let state: CaseState | null = null;

function showBanner(message: string, isError: boolean): void {
  banner.textContent = message;
  banner.className = isError ? 'banner error' : 'banner';
  banner.hidden = message === '';
}

function phaseName(taxonomy: Taxonomy, id: number | null): string {
  if (id === null) return 'start/end of video';
  const phase = taxonomy.phases.find((p) => p.id === id);
  return phase === undefined ? `phase ${id}` : `${id} ${phase.name}`;
}

function redrawTimeline(): void {
  if (state === null) return;
  const rows: RibbonRow[] = state.tracks.map((track) => ({
    name: track.annotator_id,
    track,
  }));
  if (state.draft !== null) rows.push({ name: 'consensus', track: state.draft });
  renderTimeline(timelineBox, rows, state.view, state.colors);
}

function candidateEvidence(item: BlankItem, label: number): string {
  const parts: string[] = [];
  for (const annotator of Object.keys(item.candidates).sort()) {
    const frames = item.candidates[annotator]
      .filter((run) => run.label === label)
      .reduce((sum, run) => sum + run.length, 0);
    if (frames > 0) parts.push(`${annotator}: ${frames}f`);
  }
  return parts.join(', ');
}

function redrawQueue(): void {
  if (state === null) return;
  const queue = state.queue;
  queueBox.textContent = '';

  const progress = document.createElement('p');
  progress.className = 'queue-progress';
  progress.textContent =
    `${queue.resolvedCount} resolved, ${queue.pendingCount} pending`;
  queueBox.appendChild(progress);

  const item = queue.current();
  if (item === null) {
    const done = document.createElement('p');
    done.textContent = 'No blank segments are waiting. The consensus is ready to export.';
    queueBox.appendChild(done);
  } else {
    const heading = document.createElement('p');
    heading.className = 'queue-range';
    heading.textContent =
      `Blank frames ${item.start_frame}..${item.end_frame} (${item.length} frames)`;
    queueBox.appendChild(heading);

    const context = document.createElement('p');
    context.className = 'queue-context';
    context.textContent =
      `before: ${phaseName(state.taxonomy, item.context_before)}; ` +
      `after: ${phaseName(state.taxonomy, item.context_after)}`;
    queueBox.appendChild(context);

    const list = document.createElement('ol');
    list.className = 'candidate-list';
    queue.candidateLabels().forEach((label, index) => {
      const li = document.createElement('li');
      li.className = label === queue.selection() ? 'candidate selected' : 'candidate';
      const key = document.createElement('kbd');
      key.textContent = String(index + 1);
      li.appendChild(key);
      const text = document.createElement('span');
      text.textContent =
        ` ${phaseName(state!.taxonomy, label)} (${candidateEvidence(item, label)})`;
      li.appendChild(text);
      li.addEventListener('click', () => {
        queue.selectCandidate(index);
        redrawQueue();
      });
      list.appendChild(li);
    });
    queueBox.appendChild(list);

    const controls = document.createElement('p');
    controls.className = 'queue-keys';
    controls.textContent =
      'digits select, Enter confirms, arrows move, o picks another phase';
    queueBox.appendChild(controls);
  }

  const ready = queue.exportReady;
  exportLink.classList.toggle('disabled', !ready);
  exportLink.setAttribute('aria-disabled', ready ? 'false' : 'true');
  if (ready && state !== null) {
    exportLink.href = api.exportUrl(state.project, state.caseId);
  } else {
    exportLink.removeAttribute('href');
  }
}

async function submitConfirmed(submission: PendingSubmission): Promise<void> {
  if (state === null) return;
  const { project, caseId, queue } = state;
  redrawQueue();
  try {
    const response = await api.postResolution(project, caseId, submission.request);
    queue.applied(response.pending, response.resolved_count);
    showBanner('', false);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      const blanks = await api.getBlanks(project, caseId);
      queue.conflict(submission, blanks.pending, blanks.resolved_count);
      showBanner(
        'The segment changed on the server; it has been re-queued with fresh data.',
        true,
      );
    } else {
      showBanner(err instanceof Error ? err.message : String(err), true);
    }
  }
  redrawQueue();
}

function confirmSelection(): void {
  if (state === null) return;
  const submission = state.queue.confirm();
  if (submission === null) {
    showBanner('Pick a phase before confirming.', true);
    return;
  }
  void submitConfirmed(submission);
}

function toggleOtherPanel(show?: boolean): void {
  const visible = show ?? otherPanel.hidden;
  otherPanel.hidden = !visible;
  if (visible) {
    otherInput.value = '';
    otherInput.focus();
  }
}

function chooseOtherFromInput(): void {
  if (state === null) return;
  const name = otherInput.value.trim();
  if (!state.queue.chooseOther(name)) {
    showBanner(`"${name}" is not a phase in this taxonomy.`, true);
    return;
  }
  toggleOtherPanel(false);
  otherInput.blur();
  confirmSelection();
}

async function loadCase(project: string, caseId: string): Promise<void> {
  const taxonomy = await api.getTaxonomy(project);
  const tracksResponse = await api.getTracks(project, caseId);
  const frameCount = tracksResponse.tracks[0]?.frame_count ?? 0;
  const queue = new InspectorQueue(taxonomy, 'inspector-ui', () => crypto.randomUUID());
  state = {
    project,
    caseId,
    taxonomy,
    colors: buildColorMap(taxonomy),
    tracks: tracksResponse.tracks,
    draft: tracksResponse.draft ?? null,
    frameCount,
    view: fullView(frameCount, timelineBox.clientWidth || 960),
    queue,
  };
  redrawTimeline();
  if (tracksResponse.draft !== undefined) {
    const blanks = await api.getBlanks(project, caseId);
    queue.load(blanks.pending, blanks.resolved_count);
  }
  redrawQueue();
  try {
    renderStats(statsBox, await api.getStats(project, caseId));
  } catch (err) {
    statsBox.textContent =
      err instanceof Error ? err.message : 'statistics unavailable';
  }
  showBanner('', false);
}

async function refreshCases(project: string): Promise<void> {
  const { cases } = await api.listCases(project);
  caseSelect.textContent = '';
  for (const caseId of cases) {
    const option = document.createElement('option');
    option.value = caseId;
    option.textContent = caseId;
    caseSelect.appendChild(option);
  }
  if (cases.length > 0) {
    caseSelect.value = cases[0];
    await loadCase(project, cases[0]);
  }
}

async function boot(): Promise<void> {
  const { projects } = await api.listProjects();
  projectSelect.textContent = '';
  for (const name of projects) {
    const option = document.createElement('option');
    option.value = name;
    option.textContent = name;
    projectSelect.appendChild(option);
  }
  if (projects.length > 0) {
    projectSelect.value = projects[0];
    await refreshCases(projects[0]);
  } else {
    showBanner('No projects found. Create one with the CLI or API, then reload.', true);
  }
}

projectSelect.addEventListener('change', () => {
  void refreshCases(projectSelect.value);
});

caseSelect.addEventListener('change', () => {
  void loadCase(projectSelect.value, caseSelect.value);
});

consensusBtn.addEventListener('click', async () => {
  if (state === null) return;
  try {
    const summary = await api.runConsensus(state.project, state.caseId);
    showBanner(
      `Merged ${summary.annotators.length} annotators: ` +
      `${summary.blank_frames} blank frames in ${summary.blank_segments} segments.`,
      false,
    );
    await loadCase(state.project, state.caseId);
  } catch (err) {
    showBanner(err instanceof Error ? err.message : String(err), true);
  }
});

function withView(update: (view: Viewport, frameCount: number) => Viewport): void {
  if (state === null) return;
  state.view = update(state.view, state.frameCount);
  redrawTimeline();
}

zoomInBtn.addEventListener('click', () => {
  withView((view, n) =>
    zoom(view, 2, view.startFrame + Math.floor(visibleFrames(view) / 2), n));
});
zoomOutBtn.addEventListener('click', () => {
  withView((view, n) =>
    zoom(view, 0.5, view.startFrame + Math.floor(visibleFrames(view) / 2), n));
});
panLeftBtn.addEventListener('click', () => {
  withView((view, n) => pan(view, -Math.max(1, Math.floor(visibleFrames(view) / 10)), n));
});
panRightBtn.addEventListener('click', () => {
  withView((view, n) => pan(view, Math.max(1, Math.floor(visibleFrames(view) / 10)), n));
});
zoomResetBtn.addEventListener('click', () => {
  withView((view, n) => fullView(n, view.pixelWidth));
});

otherInput.addEventListener('keydown', (event) => {
  if (event.key === 'Enter') {
    event.preventDefault();
    chooseOtherFromInput();
  } else if (event.key === 'Escape') {
    toggleOtherPanel(false);
    otherInput.blur();
  }
});

document.addEventListener('keydown', (event) => {
  const action = mapKey({ key: event.key, target: event.target as HTMLElement | null });
  if (action === null || state === null) return;
  event.preventDefault();
  switch (action.type) {
    case 'candidate':
      state.queue.selectCandidate(action.index);
      redrawQueue();
      break;
    case 'confirm':
      confirmSelection();
      break;
    case 'navigate':
      state.queue.navigate(action.delta);
      redrawQueue();
      break;
    case 'other':
      toggleOtherPanel(true);
      break;
  }
});

void boot();
