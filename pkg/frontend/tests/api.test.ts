import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, FetchLike } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("maps http failures to ApiError with status", async () => {
    const fetchFn: FetchLike = async () => jsonResponse(401, { detail: "nope" });
    const client = new ApiClient("http://x", fetchFn);
    await expect(client.login("a", "bad")).rejects.toMatchObject({
      name: "ApiError",
      status: 401,
    });
  });

  it("sends the bearer token after login", async () => {
    const seen: string[] = [];
    const fetchFn: FetchLike = async (input, init) => {
      const headers = init?.headers as Record<string, string>;
      seen.push(headers["Authorization"] ?? "");
      if (input.endsWith("/api/login")) {
        return jsonResponse(200, { token: "tok123", annotator_id: "a",
                                   role: "annotator", expires_at: "x" });
      }
      return jsonResponse(200, { round: 1, total: 0, labeled: 0, posts: [] });
    };
    const client = new ApiClient("http://x", fetchFn);
    await client.login("a", "pw");
    await client.myBatch(1);
    expect(seen[0]).toBe("");
    expect(seen[1]).toBe("Bearer tok123");
  });

  it("retries network failures with backoff and then succeeds", async () => {
    let attempts = 0;
    const fetchFn: FetchLike = async () => {
      attempts += 1;
      if (attempts <= 2) {
        throw new TypeError("fetch failed"); // connection refused / offline
      }
      return jsonResponse(200, { round: 1, total: 0, labeled: 0, posts: [] });
    };
    const client = new ApiClient("http://x", fetchFn);
    const batch = await client.myBatch(1);
    expect(attempts).toBe(3);
    expect(batch.total).toBe(0);
  }, 10_000);

  it("does not retry http errors", async () => {
    let attempts = 0;
    const fetchFn: FetchLike = async () => {
      attempts += 1;
      return jsonResponse(422, { detail: "invalid" });
    };
    const client = new ApiClient("http://x", fetchFn);
    await expect(client.submitLabel("p", "Yes", [])).rejects.toBeInstanceOf(ApiError);
    expect(attempts).toBe(1);
  });

  it("reports exhausted retries loudly instead of dropping", async () => {
    const fetchFn: FetchLike = async () => {
      throw new TypeError("fetch failed");
    };
    const client = new ApiClient("http://x", fetchFn);
    await expect(client.myBatch(1)).rejects.toMatchObject({ status: 0 });
  }, 15_000);
});
