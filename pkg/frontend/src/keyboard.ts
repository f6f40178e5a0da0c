/**
 * Keyboard mapping for the inspector queue.
 *
 * Digits pick a candidate, Enter confirms, arrows move through the
 * queue, "o" opens the free-form phase picker. Keys typed into form
 * fields are never intercepted so the picker stays usable.
 */

export type KeyAction =
  | { type: 'candidate'; index: number }
  | { type: 'confirm' }
  | { type: 'navigate'; delta: number }
  | { type: 'other' };

export interface KeyLike {
  key: string;
  target?: { tagName?: string } | null;
}

export function mapKey(event: KeyLike): KeyAction | null {
  const tag = event.target?.tagName?.toUpperCase();
  if (tag === 'INPUT' || tag === 'TEXTAREA' || tag === 'SELECT') return null;
  if (event.key >= '1' && event.key <= '9') {
    return { type: 'candidate', index: Number(event.key) - 1 };
  }
  switch (event.key) {
    case 'Enter':
      return { type: 'confirm' };
    case 'ArrowRight':
    case 'ArrowDown':
      return { type: 'navigate', delta: 1 };
    case 'ArrowLeft':
    case 'ArrowUp':
      return { type: 'navigate', delta: -1 };
    case 'o':
    case 'O':
      return { type: 'other' };
    default:
      return null;
  }
}
