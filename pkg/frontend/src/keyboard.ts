/**
 * Keyboard bindings for the reviewer flow. Everything a reviewer does --
 * move through the queue, approve, start and submit a correction -- is
 * reachable without pointer input.
 */

export type ConsoleAction =
  | 'next'
  | 'previous'
  | 'approve'
  | 'begin-correct'
  | 'submit-correct'
  | 'cancel'
  | 'refresh';

export interface KeyStroke {
  key: string;
  /** true while the correction input has focus */
  editing?: boolean;
}

const BROWSE_BINDINGS: Record<string, ConsoleAction> = {
  j: 'next',
  ArrowDown: 'next',
  k: 'previous',
  ArrowUp: 'previous',
  a: 'approve',
  c: 'begin-correct',
  r: 'refresh',
};

const EDIT_BINDINGS: Record<string, ConsoleAction> = {
  Enter: 'submit-correct',
  Escape: 'cancel',
};

/** Map a keystroke to a console action, or null to let it pass through. */
export function resolveAction(stroke: KeyStroke): ConsoleAction | null {
  const bindings = stroke.editing ? EDIT_BINDINGS : BROWSE_BINDINGS;
  return bindings[stroke.key] ?? null;
}

/** The actions that complete a review, used to assert keyboard coverage. */
export const REVIEW_ACTIONS: ConsoleAction[] = [
  'next',
  'previous',
  'approve',
  'begin-correct',
  'submit-correct',
];

export function keyboardCoverage(): Set<ConsoleAction> {
  const covered = new Set<ConsoleAction>();
  for (const action of Object.values(BROWSE_BINDINGS)) covered.add(action);
  for (const action of Object.values(EDIT_BINDINGS)) covered.add(action);
  return covered;
}
