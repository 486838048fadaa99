// Display formatting only: percent is the sole rounding the UI performs.

export interface ColorBands {
  green: number;
  amber: number;
}

// A score at or above `green` is green, at or above `amber` is amber,
// anything below is red.
export const DEFAULT_BANDS: ColorBands = { green: 80, amber: 50 };

export function confidencePercent(confidence: number): number {
  return Math.round(confidence * 100);
}

export function confidenceBand(percent: number, bands: ColorBands = DEFAULT_BANDS): 'green' | 'amber' | 'red' {
  if (percent >= bands.green) return 'green';
  if (percent >= bands.amber) return 'amber';
  return 'red';
}

export function politicalLabel(score: number): string {
  if (score === 0) return 'neutral';
  const side = score < 0 ? 'left' : 'right';
  return `${Math.abs(score)}/10 ${side}`;
}

export function monetaryLabel(score: number): string {
  if (score === 0) return 'very unlikely paid content';
  if (score >= 8) return 'very likely paid content';
  return `${score}/10 paid-content likelihood`;
}
