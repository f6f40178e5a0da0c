/**
 * Blank-resolution queue state machine.
 *
 * Holds the pending blank segments for one case plus the inspector's
 * current selection. Confirming a choice advances optimistically; the
 * caller performs the POST and then reports back with applied() or
 * conflict(). A conflict rolls the item back into the queue with the
 * server's refreshed view so the inspector re-decides on current data.
 */

import type { BlankItem, ResolutionRequest, Taxonomy } from './api.js';

export interface PendingSubmission {
  request: ResolutionRequest;
  item: BlankItem;
}

export class InspectorQueue {
  private items: BlankItem[] = [];
  private cursor = 0;
  private selected: number | null = null;
  private otherLabel: string | null = null;
  resolvedCount = 0;

  constructor(
    private readonly taxonomy: Taxonomy,
    private readonly inspectorId: string,
    private readonly newId: () => string,
  ) {}

  load(items: BlankItem[], resolvedCount: number): void {
    this.items = items.slice();
    this.resolvedCount = resolvedCount;
    this.cursor = Math.min(this.cursor, Math.max(0, this.items.length - 1));
    this.clearSelection();
  }

  get pendingCount(): number {
    return this.items.length;
  }

  get exportReady(): boolean {
    return this.items.length === 0;
  }

  current(): BlankItem | null {
    return this.items[this.cursor] ?? null;
  }

  /** Candidate runs of the current item, flattened in a stable order. */
  candidateLabels(): number[] {
    const item = this.current();
    if (item === null) return [];
    const seen = new Set<number>();
    for (const annotator of Object.keys(item.candidates).sort()) {
      for (const run of item.candidates[annotator]) {
        seen.add(run.label);
      }
    }
    return [...seen].sort((a, b) => a - b);
  }

  navigate(delta: number): void {
    if (this.items.length === 0) return;
    const next = this.cursor + delta;
    this.cursor = Math.min(this.items.length - 1, Math.max(0, next));
    this.clearSelection();
  }

  /** Select the nth candidate (0-based); ignored when out of range. */
  selectCandidate(index: number): boolean {
    const labels = this.candidateLabels();
    if (index < 0 || index >= labels.length) return false;
    this.selected = labels[index];
    this.otherLabel = null;
    return true;
  }

  /** Free-form choice; the name must exist in the taxonomy. */
  chooseOther(phaseName: string): boolean {
    const phase = this.taxonomy.phases.find((p) => p.name === phaseName);
    if (phase === undefined) return false;
    this.selected = phase.id;
    this.otherLabel = phaseName;
    return true;
  }

  selection(): number | null {
    return this.selected;
  }

  private clearSelection(): void {
    this.selected = null;
    this.otherLabel = null;
  }

  /**
   * Confirm the current selection: remove the item from the queue and
   * hand back the request to POST. Optimistic; pair with applied() or
   * conflict().
   */
  confirm(): PendingSubmission | null {
    const item = this.current();
    if (item === null || this.selected === null) return null;
    const request: ResolutionRequest = {
      start_frame: item.start_frame,
      end_frame: item.end_frame,
      label: this.selected,
      inspector_id: this.inspectorId,
      submission_id: this.newId(),
    };
    if (this.otherLabel !== null) {
      request.note = `chose ${this.otherLabel} outside the candidate list`;
    }
    this.items.splice(this.cursor, 1);
    this.cursor = Math.min(this.cursor, Math.max(0, this.items.length - 1));
    this.resolvedCount += 1;
    this.clearSelection();
    return { request, item };
  }

  /** Reconcile with the server's authoritative queue after a success. */
  applied(pending: BlankItem[], resolvedCount: number): void {
    this.load(pending, resolvedCount);
  }

  /**
   * Roll back after a 409: the optimistic advance was wrong, so adopt
   * the refreshed queue and point the cursor at the disputed segment
   * if the server still lists it.
   */
  conflict(submission: PendingSubmission, pending: BlankItem[], resolvedCount: number): void {
    this.load(pending, resolvedCount);
    const index = this.items.findIndex(
      (item) =>
        item.start_frame <= submission.item.end_frame &&
        submission.item.start_frame <= item.end_frame,
    );
    if (index >= 0) this.cursor = index;
  }
}
