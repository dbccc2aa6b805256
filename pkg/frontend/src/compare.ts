/** Timeline comparison: count-share differences between two sub-ranges.
 *
 * The comparison metric is deliberately simple and labeled as such in the
 * UI: for each label, its share of the range's posts (count / range total),
 * and the difference of shares between range B and range A. Everything is
 * computed from the already-displayed per-day count maps; no other data
 * enters.
 */

import type { CountsDoc, CountsRow } from "./types.js";

export type DayRange = { start: number; end: number }; // inclusive day indexes

export type ShareDelta = {
  label: string;
  countA: number;
  countB: number;
  shareA: number;
  shareB: number;
  delta: number; // shareB - shareA
};

export function sumRange(days: CountsRow[], range: DayRange): Record<string, number> {
  const out: Record<string, number> = {};
  const lo = Math.max(0, Math.min(range.start, range.end));
  const hi = Math.min(days.length - 1, Math.max(range.start, range.end));
  for (let i = lo; i <= hi; i++) {
    for (const [label, count] of Object.entries(days[i].counts)) {
      out[label] = (out[label] ?? 0) + count;
    }
  }
  return out;
}

export function compareRanges(doc: CountsDoc, a: DayRange, b: DayRange): ShareDelta[] {
  const countsA = sumRange(doc.days, a);
  const countsB = sumRange(doc.days, b);
  const totalA = Object.values(countsA).reduce((s, v) => s + v, 0);
  const totalB = Object.values(countsB).reduce((s, v) => s + v, 0);
  const labels = [...new Set([...Object.keys(countsA), ...Object.keys(countsB)])].sort();
  return labels.map((label) => {
    const countA = countsA[label] ?? 0;
    const countB = countsB[label] ?? 0;
    const shareA = totalA > 0 ? countA / totalA : 0;
    const shareB = totalB > 0 ? countB / totalB : 0;
    return { label, countA, countB, shareA, shareB, delta: shareB - shareA };
  });
}
