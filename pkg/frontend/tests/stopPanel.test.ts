import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient, ArrivalsResponse } from "../src/api.js";
import { StopPanel, countdownMinutes, renderArrivals } from "../src/stopPanel.js";
import { installFixtureFetch, jsonError } from "./helpers.js";

const NOW_S = 1_700_000_000;

function arrivalsBody(predictedOffsetS: number, source: "realtime" | "schedule"): ArrivalsResponse {
  return {
    stop: { stop_id: "s1", code: "101", name: "Main & First", lat: 47, lon: -122 },
    now: NOW_S,
    arrivals: [
      {
        stop_id: "s1",
        trip_id: "t1",
        route_id: "r1",
        scheduled_ts: NOW_S + predictedOffsetS,
        predicted_ts: NOW_S + predictedOffsetS,
        deviation_s: 0,
        source,
      },
    ],
    alerts: [],
  };
}

describe("countdownMinutes", () => {
  it("rounds to the nearest minute", () => {
    expect(countdownMinutes(NOW_S + 300, NOW_S * 1000)).toBe(5);
    expect(countdownMinutes(NOW_S + 89, NOW_S * 1000)).toBe(1);
    expect(countdownMinutes(NOW_S + 91, NOW_S * 1000)).toBe(2);
  });

  it("clamps past arrivals to zero", () => {
    expect(countdownMinutes(NOW_S - 120, NOW_S * 1000)).toBe(0);
  });
});

describe("stop panel rendering", () => {
  it("shows 5 min with a realtime badge for an arrival 300 s out", () => {
    const html = renderArrivals(arrivalsBody(300, "realtime"), NOW_S * 1000);
    const div = document.createElement("div");
    div.innerHTML = html;
    expect(div.querySelector(".mins")?.textContent).toBe("5 min");
    expect(div.querySelector(".badge.realtime")?.textContent).toBe("realtime");
    expect(div.querySelector(".badge.sched")).toBeNull();
  });

  it("marks schedule-only arrivals with a sched badge", () => {
    const html = renderArrivals(arrivalsBody(300, "schedule"), NOW_S * 1000);
    const div = document.createElement("div");
    div.innerHTML = html;
    expect(div.querySelector(".badge.sched")).not.toBeNull();
    expect(div.querySelector(".badge.realtime")).toBeNull();
  });
});

describe("StopPanel", () => {
  beforeEach(() => {
    localStorage.clear();
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
    vi.unstubAllGlobals();
  });

  it("renders arrivals after show() and records the stop as recent", async () => {
    const server = installFixtureFetch();
    server.get(/arrivals-and-departures-for-stop\/s1/, () => arrivalsBody(300, "realtime"));
    const container = document.createElement("div");
    const panel = new StopPanel(new ApiClient(""), container, 10, () => NOW_S * 1000);
    await panel.show("s1");
    expect(container.querySelector(".mins")?.textContent).toBe("5 min");
    expect(JSON.parse(localStorage.getItem("transitlive.recents")!)).toEqual(["s1"]);
    panel.stop();
  });

  it("shows an inline error for an unknown stop", async () => {
    const server = installFixtureFetch();
    server.get(/arrivals-and-departures-for-stop\/nope/, () =>
      jsonError(404, "unknown_stop", "unknown stop: nope"));
    const container = document.createElement("div");
    const panel = new StopPanel(new ApiClient(""), container, 10, () => NOW_S * 1000);
    await panel.show("nope");
    expect(container.querySelector(".inline-error")?.textContent).toBe("stop not found");
    panel.stop();
  });

  it("polls again at the configured interval", async () => {
    const server = installFixtureFetch();
    let calls = 0;
    server.get(/arrivals-and-departures-for-stop\/s1/, () => {
      calls += 1;
      return arrivalsBody(300, "realtime");
    });
    const container = document.createElement("div");
    const panel = new StopPanel(new ApiClient(""), container, 10, () => NOW_S * 1000);
    await panel.show("s1");
    expect(calls).toBe(1);
    await vi.advanceTimersByTimeAsync(10_000);
    expect(calls).toBe(2);
    panel.stop();
  });
});
