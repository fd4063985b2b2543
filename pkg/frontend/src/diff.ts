/**
 * Character-level diff between a live field value and an extracted
 * candidate, rendered as styled spans. Spans are lossless: concatenating
 * the `a` sides of equal/delete/substitute spans rebuilds the live value,
 * and the `b` sides of equal/insert/substitute spans rebuild the
 * candidate. Substitutions whose characters are known sound-alike
 * confusions are marked so the console can style them distinctly.
 */

export type DiffOp = 'equal' | 'insert' | 'delete' | 'substitute';

export interface DiffSpan {
  op: DiffOp;
  /** text on the live-value side ('' for inserts) */
  a: string;
  /** text on the candidate side ('' for deletes) */
  b: string;
  /** substitution explainable by the recognizer confusion table */
  homophone: boolean;
}

/** Sound-alike character pairs the recognizer commonly swaps. */
const HOMOPHONE_PAIRS: ReadonlyArray<readonly [string, string]> = [
  ['8', 'h'],
  ['8', 'a'],
  ['0', 'o'],
  ['5', 's'],
  ['1', 'l'],
  ['2', 'z'],
  ['4', 'f'],
  ['d', 't'],
  ['m', 'n'],
  ['b', 'd'],
  ['b', 'p'],
  ['s', 'f'],
  ['e', 'i'],
  ['g', 'j'],
];

const HOMOPHONES = new Set(
  HOMOPHONE_PAIRS.flatMap(([x, y]) => [`${x}|${y}`, `${y}|${x}`]),
);

export function isHomophonePair(a: string, b: string): boolean {
  return HOMOPHONES.has(`${a.toLowerCase()}|${b.toLowerCase()}`);
}

type Step = { op: DiffOp; a: string; b: string };

function alignment(a: string, b: string): Step[] {
  const n = a.length;
  const m = b.length;
  // full DP table; field values are short strings
  const dp: number[][] = [];
  for (let i = 0; i <= n; i++) {
    const row = new Array<number>(m + 1);
    row[0] = i;
    dp.push(row);
  }
  const first = dp[0]!;
  for (let j = 0; j <= m; j++) first[j] = j;
  for (let i = 1; i <= n; i++) {
    const row = dp[i]!;
    const prev = dp[i - 1]!;
    for (let j = 1; j <= m; j++) {
      const cost = a[i - 1] === b[j - 1] ? 0 : 1;
      row[j] = Math.min(prev[j]! + 1, row[j - 1]! + 1, prev[j - 1]! + cost);
    }
  }
  const steps: Step[] = [];
  let i = n;
  let j = m;
  while (i > 0 || j > 0) {
    const here = dp[i]![j]!;
    if (i > 0 && j > 0 && a[i - 1] === b[j - 1] && here === dp[i - 1]![j - 1]!) {
      steps.push({ op: 'equal', a: a[i - 1]!, b: b[j - 1]! });
      i--;
      j--;
    } else if (i > 0 && j > 0 && here === dp[i - 1]![j - 1]! + 1) {
      steps.push({ op: 'substitute', a: a[i - 1]!, b: b[j - 1]! });
      i--;
      j--;
    } else if (i > 0 && here === dp[i - 1]![j]! + 1) {
      steps.push({ op: 'delete', a: a[i - 1]!, b: '' });
      i--;
    } else {
      steps.push({ op: 'insert', a: '', b: b[j - 1]! });
      j--;
    }
  }
  steps.reverse();
  return steps;
}

/**
 * Diff the live value against a candidate, merging consecutive steps of
 * the same kind into spans.
 */
export function renderDiff(liveValue: string, candidate: string): DiffSpan[] {
  if (liveValue === candidate) {
    return liveValue === ''
      ? []
      : [{ op: 'equal', a: liveValue, b: candidate, homophone: false }];
  }
  const spans: DiffSpan[] = [];
  for (const step of alignment(liveValue, candidate)) {
    const last = spans[spans.length - 1];
    if (last !== undefined && last.op === step.op) {
      last.a += step.a;
      last.b += step.b;
    } else {
      spans.push({ op: step.op, a: step.a, b: step.b, homophone: false });
    }
  }
  for (const span of spans) {
    if (span.op === 'substitute' && span.a.length === span.b.length) {
      span.homophone = [...span.a].every((ch, k) => isHomophonePair(ch, span.b[k]!));
    }
  }
  return spans;
}

/** Rebuild the live-value side of a span list. */
export function reconstructLive(spans: DiffSpan[]): string {
  return spans.map((s) => s.a).join('');
}

/** Rebuild the candidate side of a span list. */
export function reconstructCandidate(spans: DiffSpan[]): string {
  return spans.map((s) => s.b).join('');
}
