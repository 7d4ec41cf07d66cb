export interface ServiceConfig {
  modelName: string;
  port: number;
  maxSequenceTokens: number;
  device: string;
}

/**
 * Read service settings from the environment. MIMICRY_PORT wins over
 * the conventional PORT; MIMICRY_MODEL names the bundled model (a label
 * only, there is exactly one). maxSequenceTokens must cover at least a
 * 150-token window so truncation never starves the mask of context.
 */
export function loadConfig(env: NodeJS.ProcessEnv = process.env): ServiceConfig {
  const portText = env.MIMICRY_PORT ?? env.PORT ?? "8000";
  const port = Number(portText);
  if (!Number.isInteger(port) || port < 0 || port > 65535) {
    throw new Error(`invalid port: ${portText}`);
  }
  const maxText = env.MIMICRY_MAX_TOKENS ?? "512";
  const maxSequenceTokens = Number(maxText);
  if (!Number.isInteger(maxSequenceTokens) || maxSequenceTokens < 150) {
    throw new Error(`max sequence tokens must be an integer >= 150, got ${maxText}`);
  }
  return {
    modelName: env.MIMICRY_MODEL ?? "ngram-java",
    port,
    maxSequenceTokens,
    device: "cpu",
  };
}
