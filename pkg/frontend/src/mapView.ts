// SVG map: slippy tiles underneath, stop markers with direction-of-travel
// arrows, live vehicle markers, and route shape overlays. If tiles fail to
// load the view degrades to the stop list on the side panel.

import { ApiClient, StopDetail, StopSummary, VehicleInfo } from "./api.js";
import { LatestWins, clampPollInterval } from "./state.js";

export interface Viewport {
  centerLat: number;
  centerLon: number;
  zoom: number; // slippy zoom level
}

const TILE_SIZE = 256;
export const TILE_URL_TEMPLATE = "https://tile.openstreetmap.org/{z}/{x}/{y}.png";

export function lonToX(lon: number, zoom: number): number {
  return ((lon + 180) / 360) * Math.pow(2, zoom) * TILE_SIZE;
}

export function latToY(lat: number, zoom: number): number {
  const rad = (lat * Math.PI) / 180;
  return (
    ((1 - Math.log(Math.tan(rad) + 1 / Math.cos(rad)) / Math.PI) / 2) *
    Math.pow(2, zoom) * TILE_SIZE
  );
}

export function viewportRadiusM(viewport: Viewport, widthPx: number): number {
  // ground resolution at this latitude, meters per pixel
  const mPerPx =
    (156543.03392 * Math.cos((viewport.centerLat * Math.PI) / 180)) /
    Math.pow(2, viewport.zoom);
  return (Math.max(widthPx, 1) / 2) * mPerPx;
}

export function stopArrowSvg(stop: StopSummary, bearingDeg: number, px: number, py: number): string {
  return `<g class="stop-marker" data-stop="${stop.stop_id}" transform="translate(${px},${py})">
    <circle r="6" class="stop-dot"></circle>
    <path d="M 0 -12 L 4 -5 L -4 -5 Z" class="stop-arrow"
          transform="rotate(${bearingDeg})"></path>
  </g>`;
}

export function vehicleMarkerSvg(v: VehicleInfo, px: number, py: number): string {
  return `<g class="vehicle-marker status-${v.status}" data-vehicle="${v.vehicle_id}"
    transform="translate(${px},${py})"><rect x="-5" y="-5" width="10" height="10" rx="2"></rect></g>`;
}

export class MapView {
  viewport: Viewport = { centerLat: 47.0, centerLon: -122.0, zoom: 14 };
  tilesAvailable = true;
  onStopClick: (stopId: string) => void = () => {};
  private stopDirections = new Map<string, number>();
  private stops: StopSummary[] = [];
  private vehicles: VehicleInfo[] = [];
  private routeShape: [number, number][] | null = null;
  private stopSeq = new LatestWins();
  private vehicleSeq = new LatestWins();
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private api: ApiClient,
    private svg: SVGSVGElement,
    private listFallback: HTMLElement,
    private pollIntervalS: number = 10,
  ) {
    this.pollIntervalS = clampPollInterval(pollIntervalS);
    svg.addEventListener("click", (ev) => {
      const marker = (ev.target as Element).closest(".stop-marker") as SVGGElement | null;
      if (marker) this.onStopClick(marker.dataset.stop as string);
    });
  }

  start(): void {
    void this.refreshStops();
    void this.refreshVehicles();
    if (this.timer) clearInterval(this.timer);
    this.timer = setInterval(() => void this.refreshVehicles(), this.pollIntervalS * 1000);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
  }

  setViewport(viewport: Viewport): void {
    this.viewport = viewport;
    void this.refreshStops();
  }

  async showRoute(routeId: string): Promise<void> {
    const detail = await this.api.routeDetail(routeId);
    const pattern = detail.patterns[0];
    if (!pattern) return;
    this.routeShape = pattern.shape;
    const [lat, lon] = pattern.shape[Math.floor(pattern.shape.length / 2)];
    this.viewport = { ...this.viewport, centerLat: lat, centerLon: lon };
    await this.refreshStops();
  }

  async refreshStops(): Promise<void> {
    const seq = this.stopSeq.next();
    const width = this.svg.clientWidth || 800;
    const radius = viewportRadiusM(this.viewport, width);
    const body = await this.api.stopsForLocation(
      this.viewport.centerLat, this.viewport.centerLon, radius,
    );
    if (!this.stopSeq.accept(seq)) return;
    this.stops = body.stops;
    // direction arrows need per-pattern bearings from the stop detail
    await Promise.all(
      this.stops.map(async (s) => {
        if (this.stopDirections.has(s.stop_id)) return;
        try {
          const detail: StopDetail = await this.api.stopDetail(s.stop_id);
          if (detail.patterns.length > 0) {
            this.stopDirections.set(s.stop_id, detail.patterns[0].direction_of_travel_deg);
          }
        } catch {
          // leave the marker arrowless
        }
      }),
    );
    this.render();
  }

  async refreshVehicles(): Promise<void> {
    const seq = this.vehicleSeq.next();
    try {
      const body = await this.api.vehicles();
      if (!this.vehicleSeq.accept(seq)) return;
      this.vehicles = body.vehicles;
    } catch {
      return; // keep last markers on transient failures
    }
    this.render();
  }

  private toPixel(lat: number, lon: number): [number, number] {
    const width = this.svg.clientWidth || 800;
    const height = this.svg.clientHeight || 600;
    const cx = lonToX(this.viewport.centerLon, this.viewport.zoom);
    const cy = latToY(this.viewport.centerLat, this.viewport.zoom);
    return [
      lonToX(lon, this.viewport.zoom) - cx + width / 2,
      latToY(lat, this.viewport.zoom) - cy + height / 2,
    ];
  }

  private tileLayer(): string {
    if (!this.tilesAvailable) return "";
    const width = this.svg.clientWidth || 800;
    const height = this.svg.clientHeight || 600;
    const z = this.viewport.zoom;
    const cx = lonToX(this.viewport.centerLon, z);
    const cy = latToY(this.viewport.centerLat, z);
    const x0 = Math.floor((cx - width / 2) / TILE_SIZE);
    const x1 = Math.floor((cx + width / 2) / TILE_SIZE);
    const y0 = Math.floor((cy - height / 2) / TILE_SIZE);
    const y1 = Math.floor((cy + height / 2) / TILE_SIZE);
    const tiles: string[] = [];
    for (let tx = x0; tx <= x1; tx++) {
      for (let ty = y0; ty <= y1; ty++) {
        const url = TILE_URL_TEMPLATE
          .replace("{z}", String(z)).replace("{x}", String(tx)).replace("{y}", String(ty));
        const px = tx * TILE_SIZE - cx + width / 2;
        const py = ty * TILE_SIZE - cy + height / 2;
        tiles.push(`<image href="${url}" x="${px}" y="${py}"
          width="${TILE_SIZE}" height="${TILE_SIZE}" class="tile"></image>`);
      }
    }
    return tiles.join("");
  }

  render(): void {
    const shape = this.routeShape
      ? `<polyline class="route-shape" points="${this.routeShape
          .map(([lat, lon]) => this.toPixel(lat, lon).join(","))
          .join(" ")}"></polyline>`
      : "";
    const stops = this.stops
      .map((s) => {
        const [px, py] = this.toPixel(s.lat, s.lon);
        return stopArrowSvg(s, this.stopDirections.get(s.stop_id) ?? 0, px, py);
      })
      .join("");
    const vehicles = this.vehicles
      .map((v) => {
        const [px, py] = this.toPixel(v.lat, v.lon);
        return vehicleMarkerSvg(v, px, py);
      })
      .join("");
    this.svg.innerHTML = this.tileLayer() + shape + stops + vehicles;
    for (const img of Array.from(this.svg.querySelectorAll("image.tile"))) {
      img.addEventListener("error", () => this.degradeToList(), { once: true });
    }
    this.renderListFallback();
  }

  private degradeToList(): void {
    if (!this.tilesAvailable) return;
    this.tilesAvailable = false;
    this.svg.classList.add("no-tiles");
    this.render();
  }

  private renderListFallback(): void {
    this.listFallback.innerHTML = this.stops
      .map(
        (s) => `<li class="stop-list-item" data-stop="${s.stop_id}">
          ${s.name} <small>#${s.code}</small>
          ${s.distance_m !== undefined ? `<span class="dist">${Math.round(s.distance_m)} m</span>` : ""}
        </li>`,
      )
      .join("");
  }
}
