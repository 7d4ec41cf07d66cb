import { z } from "zod";

/** Mask token used on the wire; the model's native convention is the same. */
export const MASK = "<mask>";

/**
 * Request body for POST /v1/predict. The sequence is whitespace-joined
 * token text containing exactly one mask (the mask count is checked
 * after tokenization, not here, so the error can say what it found).
 */
export const predictRequestSchema = z.object({
  sequence: z.string().min(1),
  k: z.number().int().positive().optional(),
});

export type PredictRequest = z.infer<typeof predictRequestSchema>;

export interface Candidate {
  token: string;
  score: number;
}

export interface PredictResponse {
  candidates: Candidate[];
}

export const DEFAULT_K = 5;

export function tokenizeSequence(sequence: string): string[] {
  return sequence.trim().split(/\s+/);
}

export function maskIndices(tokens: string[]): number[] {
  const out: number[] = [];
  tokens.forEach((t, i) => {
    if (t === MASK) out.push(i);
  });
  return out;
}
