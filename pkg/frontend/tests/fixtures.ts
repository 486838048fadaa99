// Canned payloads in the exact shape the verification service emits.

import type { ChatReply, Finding, VerifiedResponse } from '../src/types';

export const ANSWER = 'The sky is green and the grass is hot pink today, which everyone loves.';

function anchored(quote: string, kind: Finding['kind'], explanation: string): Finding {
  const start = ANSWER.indexOf(quote);
  if (start < 0) throw new Error(`fixture quote not in answer: ${quote}`);
  return {
    quote,
    explanation,
    kind,
    anchor: { start, end: start + quote.length, match_quality: 'exact' },
  };
}

export function makeResponse(overrides: Partial<VerifiedResponse> = {}): VerifiedResponse {
  return {
    query: 'What color is the sky?',
    answer: ANSWER,
    validated_sources: ['https://example.org/sky', 'https://example.org/grass'],
    disclosure: {
      monetary: 0,
      monetary_explanation: 'No commercial content.',
      political: 0,
      political_explanation: 'Neutral statement.',
    },
    findings: [
      anchored('sky is green', 'factual_error', 'The sky is blue in daylight.'),
      anchored('grass is hot pink', 'factual_error', 'Grass is green.'),
    ],
    self_assessment: { score: 88, explanation: 'Fairly confident.' },
    breakdown: {
      norm_sources: 0.6,
      norm_self: 0.88,
      norm_political: 1.0,
      norm_monetary: 1.0,
      norm_hallucination: 0.5,
      weights: [0.1, 0.5, 0.05, 0.05, 0.3],
      confidence: 0.75,
    },
    degraded_stages: [],
    warnings: [],
    template_version: '1',
    ...overrides,
  };
}

export function makeReply(
  overrides: Partial<VerifiedResponse> = {},
  sessionId = 'session-1',
  turnIndex = 0,
): ChatReply {
  return { session_id: sessionId, turn_index: turnIndex, response: makeResponse(overrides) };
}
