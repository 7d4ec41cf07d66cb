import { Server } from "node:http";
import { AddressInfo } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { createApp, ServiceState } from "../src/app.js";
import { ServiceConfig } from "../src/config.js";
import { buildModel } from "../src/ngram.js";

const CONFIG: ServiceConfig = {
  modelName: "ngram-java",
  port: 0,
  maxSequenceTokens: 150,
  device: "cpu",
};

function listen(state: ServiceState): Promise<{ server: Server; url: string }> {
  const server = createApp(state, CONFIG).listen(0);
  return new Promise((resolve) => {
    server.once("listening", () => {
      const { port } = server.address() as AddressInfo;
      resolve({ server, url: `http://127.0.0.1:${port}` });
    });
  });
}

async function predict(url: string, body: unknown): Promise<Response> {
  return fetch(`${url}/v1/predict`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
}

describe("wire protocol", () => {
  let server: Server;
  let url: string;

  beforeAll(async () => {
    ({ server, url } = await listen({ model: buildModel() }));
  });

  afterAll(() => {
    server.close();
  });

  it("answers the health probe", async () => {
    const res = await fetch(`${url}/v1/health`);
    expect(res.status).toBe(200);
    expect(await res.json()).toEqual({ status: "ok" });
  });

  it("fills a masked operator slot", async () => {
    const res = await predict(url, { sequence: "if ( n <mask> 0 )", k: 5 });
    expect(res.status).toBe(200);
    const body = (await res.json()) as { candidates: { token: string; score: number }[] };
    expect(body.candidates.length).toBeGreaterThan(0);
    expect(body.candidates.length).toBeLessThanOrEqual(5);
    for (const c of body.candidates) {
      expect(typeof c.token).toBe("string");
      expect(c.score).toBeGreaterThan(0);
      expect(c.score).toBeLessThanOrEqual(1);
    }
    const scores = body.candidates.map((c) => c.score);
    expect(scores).toEqual([...scores].sort((a, b) => b - a));
  });

  it("truncates the candidate list to k", async () => {
    const res = await predict(url, { sequence: "if ( n <mask> 0 )", k: 2 });
    const body = (await res.json()) as { candidates: unknown[] };
    expect(body.candidates).toHaveLength(2);
  });

  it("defaults k to 5 when omitted", async () => {
    const res = await predict(url, { sequence: "if ( n <mask> 0 )" });
    expect(res.status).toBe(200);
    const body = (await res.json()) as { candidates: unknown[] };
    expect(body.candidates.length).toBeLessThanOrEqual(5);
  });

  it("rejects a sequence with zero masks", async () => {
    const res = await predict(url, { sequence: "if ( n < 0 )", k: 5 });
    expect(res.status).toBe(400);
    const body = (await res.json()) as { error: string };
    expect(body.error).toMatch(/exactly one/);
  });

  it("rejects a sequence with two masks", async () => {
    const res = await predict(url, { sequence: "if ( <mask> < <mask> )", k: 5 });
    expect(res.status).toBe(400);
  });

  it.each([
    [{ k: 5 }],
    [{ sequence: 7, k: 5 }],
    [{ sequence: "", k: 5 }],
    [{ sequence: "a <mask> b", k: 0 }],
    [{ sequence: "a <mask> b", k: -3 }],
    [{ sequence: "a <mask> b", k: 2.5 }],
    [{ sequence: "a <mask> b", k: "many" }],
  ])("rejects schema violations: %j", async (body) => {
    const res = await predict(url, body);
    expect(res.status).toBe(400);
  });

  it("rejects bodies that are not JSON", async () => {
    const res = await fetch(`${url}/v1/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "sequence = maybe",
    });
    expect(res.status).toBe(400);
  });

  it("truncates long inputs around the mask instead of losing it", async () => {
    const filler = Array(400).fill("pad");
    const sequence = [...filler, "if", "(", "n", "<mask>", "0", ")"].join(" ");
    const res = await predict(url, { sequence, k: 3 });
    expect(res.status).toBe(200);
    const body = (await res.json()) as { candidates: { token: string }[] };
    expect(body.candidates.length).toBeGreaterThan(0);
  });

  it("gives identical answers to identical requests", async () => {
    const first = await predict(url, { sequence: "return this . <mask> ;", k: 4 });
    const second = await predict(url, { sequence: "return this . <mask> ;", k: 4 });
    expect(await first.text()).toBe(await second.text());
  });
});

describe("while the model is loading", () => {
  let server: Server;
  let url: string;

  beforeAll(async () => {
    ({ server, url } = await listen({ model: null }));
  });

  afterAll(() => {
    server.close();
  });

  it("health reports loading with 503", async () => {
    const res = await fetch(`${url}/v1/health`);
    expect(res.status).toBe(503);
    expect(await res.json()).toEqual({ status: "loading" });
  });

  it("predict answers 503", async () => {
    const res = await predict(url, { sequence: "a <mask> b", k: 1 });
    expect(res.status).toBe(503);
  });
});
