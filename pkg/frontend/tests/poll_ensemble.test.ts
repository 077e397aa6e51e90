import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { EnsembleRunner } from "../src/ensemble.js";
import { POLL_INTERVAL_MS, pollEnsemble } from "../src/poll.js";
import { EnsembleStatus } from "../src/types.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), { status });
}

function scriptedService(statuses: EnsembleStatus["status"][]) {
  let polls = 0;
  let posts = 0;
  const fetchFn = async (url: string, init?: RequestInit) => {
    if (init?.method === "POST") {
      posts++;
      return jsonResponse({ job: "j1" });
    }
    const state = statuses[Math.min(polls, statuses.length - 1)];
    polls++;
    const body: EnsembleStatus = { job: "j1", status: state };
    if (state === "done") {
      body.n_frames = 2;
      body.window_count = 5;
      body.frames = ["/api/ensemble/j1/frame/0", "/api/ensemble/j1/frame/1"];
    }
    if (state === "error") {
      body.error = "frames missing";
    }
    return jsonResponse(body);
  };
  return { fetchFn, counts: () => ({ polls, posts }) };
}

describe("poll cadence", () => {
  it("sleeps the fixed interval between polls and reports progress", async () => {
    const service = scriptedService(["pending", "running", "running", "done"]);
    const client = new ApiClient("", service.fetchFn);
    const sleeps: number[] = [];
    const updates: string[] = [];
    const status = await pollEnsemble(
      client,
      "j1",
      (u) => updates.push(u.status),
      async (ms) => {
        sleeps.push(ms);
      },
    );
    expect(status.status).toBe("done");
    expect(updates).toEqual(["pending", "running", "running", "done"]);
    expect(sleeps).toEqual([POLL_INTERVAL_MS, POLL_INTERVAL_MS, POLL_INTERVAL_MS]);
  });

  it("raises on job error with the server message", async () => {
    const service = scriptedService(["running", "error"]);
    const client = new ApiClient("", service.fetchFn);
    await expect(
      pollEnsemble(client, "j1", undefined, async () => {}),
    ).rejects.toThrow("frames missing");
  });
});

describe("ensemble runner caching", () => {
  const region = { disc: [1, 2, 0.5] as [number, number, number] };

  it("replay after completion issues no new job", async () => {
    const service = scriptedService(["running", "done"]);
    const client = new ApiClient("", service.fetchFn);
    const runner = new EnsembleRunner(client, async () => {});
    const first = await runner.run(region);
    expect(first.status).toBe("done");
    const postsAfterFirst = service.counts().posts;
    const second = await runner.run(region);
    expect(second).toEqual(first);
    expect(service.counts().posts).toBe(postsAfterFirst); // cache hit: no POST
    expect(runner.cachedFor(region)).toEqual(first);
  });

  it("concurrent runs for one region share a job", async () => {
    const service = scriptedService(["running", "done"]);
    const client = new ApiClient("", service.fetchFn);
    const runner = new EnsembleRunner(client, async () => {});
    const [a, b] = await Promise.all([runner.run(region), runner.run(region)]);
    expect(a).toEqual(b);
    expect(service.counts().posts).toBe(1);
  });

  it("pending state never exposes stale frames", async () => {
    const service = scriptedService(["pending", "done"]);
    const client = new ApiClient("", service.fetchFn);
    const runner = new EnsembleRunner(client, async () => {});
    const seen: EnsembleStatus[] = [];
    await runner.run(region, {}, (u) => seen.push(u));
    const pendingStates = seen.filter((s) => s.status !== "done");
    expect(pendingStates.length).toBeGreaterThan(0);
    for (const s of pendingStates) {
      expect(s.frames).toBeUndefined();
    }
  });
});
