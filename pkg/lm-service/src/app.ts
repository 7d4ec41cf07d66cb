import express, { Express, NextFunction, Request, Response } from "express";

import { ServiceConfig } from "./config.js";
import { NgramModel, predictMasked, windowAroundMask } from "./ngram.js";
import {
  DEFAULT_K,
  PredictResponse,
  maskIndices,
  predictRequestSchema,
  tokenizeSequence,
} from "./protocol.js";

export interface ServiceState {
  model: NgramModel | null;
}

/**
 * Build the HTTP app. Request handling is stateless; the only shared
 * state is the model reference, read-only after startup. While
 * state.model is null every endpoint answers 503.
 */
export function createApp(state: ServiceState, config: ServiceConfig): Express {
  const app = express();
  app.use(express.json());

  app.get("/v1/health", (_req: Request, res: Response) => {
    if (state.model === null) {
      res.status(503).json({ status: "loading" });
      return;
    }
    res.json({ status: "ok" });
  });

  app.post("/v1/predict", (req: Request, res: Response) => {
    const model = state.model;
    if (model === null) {
      res.status(503).json({ error: "model is loading" });
      return;
    }
    const parsed = predictRequestSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: parsed.error.issues[0].message ?? "bad request" });
      return;
    }
    const k = parsed.data.k ?? DEFAULT_K;
    let tokens = tokenizeSequence(parsed.data.sequence);
    const masks = maskIndices(tokens);
    if (masks.length !== 1) {
      res.status(400).json({ error: `sequence must contain exactly one <mask>, found ${masks.length}` });
      return;
    }
    let maskIndex = masks[0];
    if (tokens.length > config.maxSequenceTokens) {
      tokens = windowAroundMask(tokens, maskIndex, config.maxSequenceTokens);
      maskIndex = maskIndices(tokens)[0];
    }
    const body: PredictResponse = { candidates: predictMasked(model, tokens, maskIndex, k) };
    res.json(body);
  });

  // Malformed JSON bodies surface here from express.json().
  app.use((err: Error, _req: Request, res: Response, next: NextFunction) => {
    if (err instanceof SyntaxError) {
      res.status(400).json({ error: "request body is not valid JSON" });
      return;
    }
    next(err);
  });

  return app;
}
