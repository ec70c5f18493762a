// Console entry point: tab wiring between the map, stop panel, and alerts
// admin, plus stop search by code or name and bookmark/recent shortcuts.

import { ApiClient } from "./api.js";
import { AlertsAdmin } from "./alertsAdmin.js";
import { MapView } from "./mapView.js";
import { StopPanel } from "./stopPanel.js";
import { DEFAULT_POLL_INTERVAL_S, getBookmarks, getRecents } from "./state.js";

function el<T extends Element>(selector: string): T {
  const found = document.querySelector<T>(selector);
  if (!found) throw new Error(`missing element: ${selector}`);
  return found;
}

export function setupConsole(api: ApiClient): void {
  const panel = new StopPanel(api, el("#stop-panel"), DEFAULT_POLL_INTERVAL_S);
  const map = new MapView(api, el("#map"), el("#stop-list"), DEFAULT_POLL_INTERVAL_S);
  const admin = new AlertsAdmin(api, el("#alerts-admin"), () => void panel.refresh());

  map.onStopClick = (stopId) => void panel.show(stopId);
  el("#stop-list").addEventListener("click", (ev) => {
    const item = (ev.target as HTMLElement).closest(".stop-list-item") as HTMLElement | null;
    if (item && item.dataset.stop) void panel.show(item.dataset.stop);
  });

  const tabs = Array.from(document.querySelectorAll<HTMLElement>("[data-tab]"));
  for (const tab of tabs) {
    tab.addEventListener("click", () => {
      for (const t of tabs) t.classList.toggle("active", t === tab);
      for (const view of Array.from(document.querySelectorAll<HTMLElement>("[data-view]"))) {
        view.hidden = view.dataset.view !== tab.dataset.tab;
      }
    });
  }

  const search = el<HTMLFormElement>("#stop-search");
  search.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const query = (el<HTMLInputElement>("#stop-search input")).value.trim();
    if (query) void findAndShowStop(api, map, panel, query);
  });

  renderShortcuts(api, panel);
  map.start();
  void admin.start();
}

async function findAndShowStop(
  api: ApiClient, map: MapView, panel: StopPanel, query: string,
): Promise<void> {
  // try the query as a stop id first, then match by code or name among
  // stops near the current viewport
  try {
    const detail = await api.stopDetail(query);
    map.setViewport({ ...map.viewport, centerLat: detail.lat, centerLon: detail.lon });
    await panel.show(detail.stop_id);
    return;
  } catch {
    // fall through to search
  }
  const body = await api.stopsForLocation(
    map.viewport.centerLat, map.viewport.centerLon, 50000,
  );
  const q = query.toLowerCase();
  const hit = body.stops.find(
    (s) => s.code.toLowerCase() === q || s.name.toLowerCase().includes(q),
  );
  if (hit) {
    map.setViewport({ ...map.viewport, centerLat: hit.lat, centerLon: hit.lon });
    await panel.show(hit.stop_id);
  }
}

function renderShortcuts(api: ApiClient, panel: StopPanel): void {
  const container = el<HTMLElement>("#shortcuts");
  const bookmarks = getBookmarks();
  const recents = getRecents().filter((s) => !bookmarks.includes(s));
  const chip = (stopId: string, cls: string) =>
    `<button class="chip ${cls}" data-stop="${stopId}">${stopId}</button>`;
  container.innerHTML =
    bookmarks.map((s) => chip(s, "bookmark")).join("") +
    recents.map((s) => chip(s, "recent")).join("");
  container.addEventListener("click", (ev) => {
    const btn = (ev.target as HTMLElement).closest(".chip") as HTMLElement | null;
    if (btn && btn.dataset.stop) void panel.show(btn.dataset.stop);
  });
}

if (typeof document !== "undefined" && document.getElementById("map")) {
  setupConsole(new ApiClient(""));
}
