// Fixture fetch: routes requests by URL pattern to canned handlers so the
// console modules run against deterministic server responses.

import { vi } from "vitest";

export type Handler = (url: string, init?: RequestInit) => unknown;

export interface FixtureServer {
  get(pattern: RegExp, handler: Handler): void;
  post(pattern: RegExp, handler: Handler): void;
  put(pattern: RegExp, handler: Handler): void;
  del(pattern: RegExp, handler: Handler): void;
}

export function installFixtureFetch(): FixtureServer {
  const routes: { method: string; pattern: RegExp; handler: Handler }[] = [];

  vi.stubGlobal("fetch", async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = (init?.method ?? "GET").toUpperCase();
    for (const r of routes) {
      if (r.method === method && r.pattern.test(url)) {
        const body = r.handler(url, init);
        if (body instanceof Response) return body;
        return new Response(JSON.stringify(body), {
          status: method === "POST" ? 201 : 200,
          headers: { "Content-Type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ code: "unknown_stop", message: `no fixture for ${url}` }), {
      status: 404,
      headers: { "Content-Type": "application/json" },
    });
  });

  return {
    get: (pattern, handler) => routes.push({ method: "GET", pattern, handler }),
    post: (pattern, handler) => routes.push({ method: "POST", pattern, handler }),
    put: (pattern, handler) => routes.push({ method: "PUT", pattern, handler }),
    del: (pattern, handler) => routes.push({ method: "DELETE", pattern, handler }),
  };
}

export function jsonError(status: number, code: string, message: string): Response {
  return new Response(JSON.stringify({ code, message }), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
