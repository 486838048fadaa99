// Payload shapes of the verification service's JSON API. Spans and all
// numbers come from the backend as-is and are never recomputed here.

export interface AnchoredSpan {
  start: number;
  end: number;
  match_quality: 'exact' | 'normalized' | 'fuzzy';
}

export interface Finding {
  quote: string;
  explanation: string;
  kind: 'factual_error' | 'subjective_statement';
  anchor: AnchoredSpan | null;
}

export interface Disclosure {
  monetary: number;
  monetary_explanation: string;
  political: number;
  political_explanation: string;
}

export interface SelfAssessment {
  score: number;
  explanation: string;
}

export interface Breakdown {
  norm_sources: number;
  norm_self: number;
  norm_political: number;
  norm_monetary: number;
  norm_hallucination: number;
  weights: number[];
  confidence: number;
}

export interface VerifiedResponse {
  query: string;
  answer: string;
  validated_sources: string[];
  disclosure: Disclosure;
  findings: Finding[];
  self_assessment: SelfAssessment;
  breakdown: Breakdown;
  degraded_stages: string[];
  warnings: string[];
  template_version: string;
}

export interface ChatReply {
  session_id: string;
  turn_index: number;
  response: VerifiedResponse;
}

export interface ApiError {
  error: { category: string; message: string };
}
