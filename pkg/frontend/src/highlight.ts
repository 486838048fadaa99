// Turns backend anchor spans into non-overlapping render segments.
// Overlapping finding spans merge into one visual region whose segment
// lists every covering finding, so all explanations stay reachable.

import type { Finding } from './types';

export interface Segment {
  start: number;
  end: number;
  findingIndexes: number[];
}

export function segmentAnswer(answerLength: number, findings: Finding[]): Segment[] {
  const anchored = findings
    .map((finding, index) => ({ finding, index }))
    .filter(({ finding }) =>
      finding.anchor !== null &&
      finding.anchor.start >= 0 &&
      finding.anchor.end <= answerLength &&
      finding.anchor.start < finding.anchor.end,
    );

  const boundaries = new Set<number>([0, answerLength]);
  for (const { finding } of anchored) {
    boundaries.add(finding.anchor!.start);
    boundaries.add(finding.anchor!.end);
  }
  const sorted = [...boundaries].sort((a, b) => a - b);

  const segments: Segment[] = [];
  for (let i = 0; i < sorted.length - 1; i++) {
    const start = sorted[i];
    const end = sorted[i + 1];
    const covering = anchored
      .filter(({ finding }) => finding.anchor!.start <= start && finding.anchor!.end >= end)
      .map(({ index }) => index);
    segments.push({ start, end, findingIndexes: covering });
  }
  return segments;
}
