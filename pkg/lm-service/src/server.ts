import { createApp, ServiceState } from "./app.js";
import { loadConfig } from "./config.js";
import { buildModel } from "./ngram.js";

const config = loadConfig();
const state: ServiceState = { model: null };
const app = createApp(state, config);

const server = app.listen(config.port, () => {
  // Counting n-grams is cheap; do it after bind so health can answer
  // 503 while anything heavier would still be in flight.
  state.model = buildModel();
  const addr = server.address();
  const port = typeof addr === "object" && addr !== null ? addr.port : config.port;
  console.log(`lm-service (${config.modelName}, ${config.device}) listening on port ${port}`);
});
