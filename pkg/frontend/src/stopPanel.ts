// Stop arrivals panel: countdown rows from server-predicted times, alert
// banners, bookmark toggle, auto-refresh at the poll interval.

import { ApiClient, ApiError, ArrivalsResponse } from "./api.js";
import { addRecent, clampPollInterval, isBookmarked, toggleBookmark, LatestWins } from "./state.js";

export function countdownMinutes(predictedTs: number, nowMs: number): number {
  return Math.max(0, Math.round((predictedTs - nowMs / 1000) / 60));
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderArrivals(data: ArrivalsResponse, nowMs: number): string {
  const rows = data.arrivals.map((a) => {
    const mins = countdownMinutes(a.predicted_ts, nowMs);
    const badge = a.source === "realtime"
      ? `<span class="badge realtime">realtime</span>`
      : `<span class="badge sched">sched</span>`;
    return `<tr class="arrival-row" data-trip="${escapeHtml(a.trip_id)}">
      <td class="route">${escapeHtml(a.route_id)}</td>
      <td class="mins">${mins} min</td>
      <td>${badge}</td>
    </tr>`;
  });
  const alerts = data.alerts.map(
    (al) => `<div class="alert ${al.severity}" data-alert="${escapeHtml(al.alert_id)}">
      <strong>${escapeHtml(al.severity)}</strong>: ${escapeHtml(al.summary)}
    </div>`,
  );
  const starred = isBookmarked(data.stop.stop_id) ? "★" : "☆";
  return `
    <div class="stop-header">
      <h2>${escapeHtml(data.stop.name)} <small>#${escapeHtml(data.stop.code)}</small></h2>
      <button class="bookmark-btn" data-stop="${escapeHtml(data.stop.stop_id)}">${starred}</button>
    </div>
    ${alerts.join("")}
    ${rows.length
      ? `<table class="arrivals"><tbody>${rows.join("")}</tbody></table>`
      : `<p class="empty">No upcoming arrivals.</p>`}
  `;
}

export class StopPanel {
  private timer: ReturnType<typeof setInterval> | null = null;
  private seq = new LatestWins();
  stopId: string | null = null;

  constructor(
    private api: ApiClient,
    private container: HTMLElement,
    private pollIntervalS: number = 10,
    private now: () => number = Date.now,
  ) {
    this.pollIntervalS = clampPollInterval(pollIntervalS);
    container.addEventListener("click", (ev) => {
      const btn = (ev.target as HTMLElement).closest(".bookmark-btn") as HTMLElement | null;
      if (btn && btn.dataset.stop) {
        toggleBookmark(btn.dataset.stop);
        void this.refresh();
      }
    });
  }

  async show(stopId: string): Promise<void> {
    this.stopId = stopId;
    addRecent(stopId);
    await this.refresh();
    if (this.timer) clearInterval(this.timer);
    this.timer = setInterval(() => void this.refresh(), this.pollIntervalS * 1000);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
  }

  async refresh(): Promise<void> {
    if (!this.stopId) return;
    const seq = this.seq.next();
    try {
      const data = await this.api.arrivalsForStop(this.stopId);
      if (!this.seq.accept(seq)) return;
      this.container.innerHTML = renderArrivals(data, this.now());
    } catch (e) {
      if (!this.seq.accept(seq)) return;
      const message = e instanceof ApiError && e.code === "unknown_stop"
        ? "stop not found"
        : `could not load arrivals (${e instanceof Error ? e.message : e})`;
      // keep any previously rendered content; show the error inline on top
      const existing = this.container.querySelector(".inline-error");
      if (existing) {
        existing.textContent = message;
      } else {
        const div = document.createElement("div");
        div.className = "inline-error";
        div.textContent = message;
        this.container.prepend(div);
      }
    }
  }
}
