// Typed client for the transit service JSON API. The console renders server
// truth only: no arrival math happens client-side beyond countdown minutes.

export interface StopSummary {
  stop_id: string;
  code: string;
  name: string;
  lat: number;
  lon: number;
  distance_m?: number;
}

export interface StopPatternInfo {
  pattern_id: string;
  route_id: string;
  direction_id: number;
  direction_of_travel_deg: number;
}

export interface StopDetail extends StopSummary {
  patterns: StopPatternInfo[];
}

export interface ArrivalEstimate {
  stop_id: string;
  trip_id: string;
  route_id: string;
  scheduled_ts: number;
  predicted_ts: number;
  deviation_s: number;
  source: "realtime" | "schedule";
  vehicle_distance_m?: number;
}

export interface ServiceAlert {
  alert_id: string;
  summary: string;
  description: string;
  severity: "info" | "warning" | "severe";
  affected_route_ids: string[];
  affected_stop_ids: string[];
  active_from: number;
  active_until: number;
  created_ts: number;
  modified_ts: number;
}

export interface AlertDraft {
  summary: string;
  description: string;
  severity: string;
  affected_route_ids: string[];
  affected_stop_ids: string[];
  active_from: number;
  active_until: number;
}

export interface ArrivalsResponse {
  stop: StopSummary;
  now: number;
  arrivals: ArrivalEstimate[];
  alerts: ServiceAlert[];
}

export interface RouteSummary {
  route_id: string;
  short_name: string;
  long_name: string;
}

export interface RoutePatternDetail {
  pattern_id: string;
  direction_id: number;
  shape: [number, number][];
  stops: (StopSummary & { along_shape_m: number })[];
}

export interface RouteDetail extends RouteSummary {
  patterns: RoutePatternDetail[];
}

export interface VehicleInfo {
  vehicle_id: string;
  trip_id: string;
  along_m: number;
  deviation_s: number;
  last_fix_ts: number;
  status: "tracking" | "stale" | "off_route";
  lat: number;
  lon: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, init);
    } catch (e) {
      throw new ApiError(0, "network_error", String(e));
    }
    if (!resp.ok) {
      let code = "http_error";
      let message = `HTTP ${resp.status}`;
      try {
        const body = await resp.json();
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp.json() as Promise<T>;
  }

  stopsForLocation(lat: number, lon: number, radiusM?: number): Promise<{ stops: StopSummary[] }> {
    const params = new URLSearchParams({ lat: String(lat), lon: String(lon) });
    if (radiusM !== undefined) params.set("radius_m", String(radiusM));
    return this.request(`/api/stops-for-location?${params}`);
  }

  stopDetail(stopId: string): Promise<StopDetail> {
    return this.request(`/api/stop/${encodeURIComponent(stopId)}`);
  }

  arrivalsForStop(stopId: string): Promise<ArrivalsResponse> {
    return this.request(`/api/arrivals-and-departures-for-stop/${encodeURIComponent(stopId)}`);
  }

  routes(): Promise<{ routes: RouteSummary[] }> {
    return this.request("/api/routes");
  }

  routeDetail(routeId: string): Promise<RouteDetail> {
    return this.request(`/api/route/${encodeURIComponent(routeId)}`);
  }

  vehicles(): Promise<{ vehicles: VehicleInfo[] }> {
    return this.request("/api/vehicles");
  }

  listAlerts(): Promise<{ alerts: ServiceAlert[] }> {
    return this.request("/api/alerts");
  }

  createAlert(draft: AlertDraft): Promise<ServiceAlert> {
    return this.request("/api/alerts", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(draft),
    });
  }

  updateAlert(alertId: string, draft: AlertDraft): Promise<ServiceAlert> {
    return this.request(`/api/alerts/${encodeURIComponent(alertId)}`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(draft),
    });
  }

  deleteAlert(alertId: string): Promise<{ deleted: string }> {
    return this.request(`/api/alerts/${encodeURIComponent(alertId)}`, { method: "DELETE" });
  }
}
