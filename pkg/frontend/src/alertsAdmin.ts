// Service alert administration: list active alerts, create and edit them
// through a form, delete with confirmation. The list always re-renders from
// the server response, never from local form state.

import {
  AlertDraft,
  ApiClient,
  ApiError,
  RouteSummary,
  ServiceAlert,
  StopSummary,
} from "./api.js";

const SEVERITIES = ["info", "warning", "severe"] as const;

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function tsToLocal(ts: number): string {
  const d = new Date(ts * 1000);
  const pad = (n: number) => String(n).padStart(2, "0");
  return `${d.getFullYear()}-${pad(d.getMonth() + 1)}-${pad(d.getDate())}T` +
    `${pad(d.getHours())}:${pad(d.getMinutes())}`;
}

export function draftFromForm(form: HTMLFormElement): AlertDraft {
  const data = new FormData(form);
  const checked = (name: string) =>
    Array.from(form.querySelectorAll<HTMLInputElement>(`input[name="${name}"]:checked`))
      .map((el) => el.value);
  const toTs = (v: string) => (v ? Math.floor(new Date(v).getTime() / 1000) : 0);
  return {
    summary: String(data.get("summary") ?? "").trim(),
    description: String(data.get("description") ?? "").trim(),
    severity: String(data.get("severity") ?? "info"),
    affected_route_ids: checked("route"),
    affected_stop_ids: checked("stop"),
    active_from: toTs(String(data.get("active_from") ?? "")),
    active_until: toTs(String(data.get("active_until") ?? "")),
  };
}

export function renderAlertList(alerts: ServiceAlert[]): string {
  if (alerts.length === 0) return `<p class="empty">No active alerts.</p>`;
  return alerts
    .map(
      (a) => `<div class="alert-card ${a.severity}" data-alert="${escapeHtml(a.alert_id)}">
        <strong>${escapeHtml(a.severity)}</strong>: ${escapeHtml(a.summary)}
        <div class="alert-meta">routes: ${a.affected_route_ids.map(escapeHtml).join(", ") || "–"}
          | stops: ${a.affected_stop_ids.map(escapeHtml).join(", ") || "–"}</div>
        <button class="edit-alert" data-alert="${escapeHtml(a.alert_id)}">edit</button>
        <button class="delete-alert" data-alert="${escapeHtml(a.alert_id)}">delete</button>
      </div>`,
    )
    .join("");
}

export class AlertsAdmin {
  alerts: ServiceAlert[] = [];
  private editingId: string | null = null;
  private routes: RouteSummary[] = [];
  private stops: StopSummary[] = [];
  confirmDelete: (alertId: string) => boolean = () => window.confirm("Delete this alert?");

  constructor(
    private api: ApiClient,
    private container: HTMLElement,
    private onChange: () => void = () => {},
  ) {
    container.addEventListener("click", (ev) => {
      const target = ev.target as HTMLElement;
      const del = target.closest(".delete-alert") as HTMLElement | null;
      if (del && del.dataset.alert) {
        void this.deleteAlert(del.dataset.alert);
        return;
      }
      const edit = target.closest(".edit-alert") as HTMLElement | null;
      if (edit && edit.dataset.alert) {
        this.editingId = edit.dataset.alert;
        this.render();
      }
    });
    container.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.submit(ev.target as HTMLFormElement);
    });
  }

  async start(): Promise<void> {
    this.routes = (await this.api.routes()).routes;
    // the stop picker lists every stop served by some route; there is no
    // list-all-stops endpoint so collect them from the route patterns
    const byId = new Map<string, StopSummary>();
    await Promise.all(
      this.routes.map(async (r) => {
        try {
          const detail = await this.api.routeDetail(r.route_id);
          for (const p of detail.patterns) {
            for (const s of p.stops) byId.set(s.stop_id, s);
          }
        } catch {
          // picker stays partial if a route fails to load
        }
      }),
    );
    this.stops = Array.from(byId.values()).sort((a, b) => a.name.localeCompare(b.name));
    await this.refresh();
  }

  setStops(stops: StopSummary[]): void {
    this.stops = stops;
    this.render();
  }

  async refresh(): Promise<void> {
    const body = await this.api.listAlerts();
    this.alerts = body.alerts;
    this.render();
    this.onChange();
  }

  private formHtml(): string {
    const editing = this.alerts.find((a) => a.alert_id === this.editingId) ?? null;
    const routeBoxes = this.routes
      .map(
        (r) => `<label><input type="checkbox" name="route" value="${escapeHtml(r.route_id)}"
          ${editing?.affected_route_ids.includes(r.route_id) ? "checked" : ""}>
          ${escapeHtml(r.short_name)}</label>`,
      )
      .join("");
    const stopBoxes = this.stops
      .map(
        (s) => `<label><input type="checkbox" name="stop" value="${escapeHtml(s.stop_id)}"
          ${editing?.affected_stop_ids.includes(s.stop_id) ? "checked" : ""}>
          ${escapeHtml(s.name)}</label>`,
      )
      .join("");
    const sevOptions = SEVERITIES
      .map(
        (sev) => `<option value="${sev}" ${editing?.severity === sev ? "selected" : ""}>${sev}</option>`,
      )
      .join("");
    return `<form class="alert-form" data-editing="${this.editingId ?? ""}">
      <h3>${editing ? `Edit ${escapeHtml(editing.alert_id)}` : "New alert"}</h3>
      <label>Summary <input name="summary" maxlength="140"
        value="${editing ? escapeHtml(editing.summary) : ""}"></label>
      <div class="field-error" data-field="summary"></div>
      <label>Description <textarea name="description">${editing ? escapeHtml(editing.description) : ""}</textarea></label>
      <label>Severity <select name="severity">${sevOptions}</select></label>
      <div class="field-error" data-field="severity"></div>
      <fieldset class="routes"><legend>Routes</legend>${routeBoxes}</fieldset>
      <fieldset class="stops"><legend>Stops</legend>${stopBoxes}</fieldset>
      <label>From <input type="datetime-local" name="active_from"
        value="${editing ? tsToLocal(editing.active_from) : ""}"></label>
      <label>Until <input type="datetime-local" name="active_until"
        value="${editing ? tsToLocal(editing.active_until) : ""}"></label>
      <div class="field-error" data-field="active_from"></div>
      <div class="form-error"></div>
      <button type="submit">${editing ? "Save" : "Create"}</button>
      ${editing ? `<button type="button" class="cancel-edit">Cancel</button>` : ""}
    </form>`;
  }

  render(): void {
    this.container.innerHTML =
      `<div class="alert-list">${renderAlertList(this.alerts)}</div>` + this.formHtml();
    const cancel = this.container.querySelector(".cancel-edit");
    if (cancel) {
      cancel.addEventListener("click", () => {
        this.editingId = null;
        this.render();
      });
    }
  }

  async submit(form: HTMLFormElement): Promise<void> {
    const draft = draftFromForm(form);
    try {
      if (this.editingId) {
        await this.api.updateAlert(this.editingId, draft);
        this.editingId = null;
      } else {
        await this.api.createAlert(draft);
      }
      await this.refresh();
    } catch (e) {
      this.showError(form, e);
    }
  }

  private showError(form: HTMLFormElement, e: unknown): void {
    const message = e instanceof ApiError ? e.message : String(e);
    // server validation messages name the offending field; route them to
    // the matching per-field slot when possible
    const fieldDiv = Array.from(form.querySelectorAll<HTMLElement>(".field-error")).find(
      (div) => div.dataset.field && message.includes(div.dataset.field),
    );
    (fieldDiv ?? (form.querySelector(".form-error") as HTMLElement)).textContent = message;
  }

  async deleteAlert(alertId: string): Promise<void> {
    if (!this.confirmDelete(alertId)) return;
    await this.api.deleteAlert(alertId);
    await this.refresh();
  }
}
