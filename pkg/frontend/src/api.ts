/** Typed client for the casescope HTTP API. All engine math stays server-side:
 *  every number the views display comes out of one of these responses. */

export type Modality = "image" | "text" | "indicator";
export type Space = Modality | "fusion";
export type PairKind = "imageText" | "imageIndicator" | "textIndicator";

export interface FiveNumber {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export interface PairSim {
  imageText: number;
  imageIndicator: number;
  textIndicator: number;
}

export interface NeighborSet {
  ids: string[];
  radius: number;
}

export interface GlyphMetrics {
  caseId: string;
  k: number;
  pairSim: PairSim;
  tripleSim: number;
  pairPopulation: Record<PairKind, FiveNumber>;
  neighbors: Record<Modality, NeighborSet>;
}

export interface Page<T> {
  items: T[];
  total: number;
  limit: number;
  offset: number;
}

export interface CaseSummary {
  caseId: string;
  specialty: string;
  admitDate: string;
  chiefComplaint: string;
}

export interface ScatterPoint {
  caseId: string;
  x: number;
  y: number;
}

export interface StripeDoc {
  binEdges: number[];
  counts: number[];
  currentBin: number;
}

export interface IndicatorStatus {
  value: number;
  status: "below" | "within" | "above";
  radar: number;
  low: number;
  high: number;
  unit: string;
  category: string;
  stripe: StripeDoc;
}

export interface CaseResponse {
  case: {
    caseId: string;
    specialty: string;
    admitDate: string;
    chiefComplaint: string;
    diagnosisText: string;
    historyEntries: { date: string; text: string }[];
    physicalExam: { name: string; area: string; kind: string; status: string }[];
    imageRefs: string[];
  };
  indicatorStatuses: Record<string, IndicatorStatus>;
  examSummary: {
    perArea: Record<string, number>;
    perKind: Record<string, number>;
    abnormal: string[];
  };
  demographicStripes: Record<string, StripeDoc>;
}

export interface Detection {
  label: string;
  imageRef: string;
  bbox: [number, number, number, number];
  confidence: number;
  mask: { width: number; height: number; runs: number[] } | null;
}

export interface DiscSignalDoc {
  region: string;
  min: number;
  mean: number;
  max: number;
  normalized: { min: number; mean: number; max: number } | null;
  protrusionScore: number;
  protrusionFlagged: boolean;
  csfRatio: { min: number; mean: number; max: number } | null;
  density: Record<string, StripeDoc>;
}

export interface CaseDetail {
  caseId: string;
  csfMean: number | null;
  imageRefs: string[];
  discSignals: DiscSignalDoc[];
  detections: Detection[];
  links: { detectionIndex: number; phraseSpan: [number, number]; phrase: string }[];
}

export interface GroupLinks {
  spaces: Record<Space, ScatterPoint[]>;
}

export interface LayoutRequest {
  texts: { id: string; label: string; halfExtents: [number, number]; wordMassOverride?: number }[];
  image: { halfExtents: [number, number] };
  config?: Record<string, number>;
}

export interface LayoutResult {
  positions: Record<string, [number, number]>;
  iterations: number;
  converged: boolean;
  residualOverlaps: number;
}

export interface AnalysisRecord {
  recordId: number;
  caseId: string;
  createdAt: string;
  updatedAt: string;
  summary: string;
  comments: string;
  phase: "practice" | "learning";
  regionNotes: { imageRef: string; label: string; note: string; shape: unknown }[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: { code: string; message: string } };
        if (body.error) {
          code = body.error.code;
          message = body.error.message;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  ready(): Promise<{ ready: boolean; cases: number }> {
    return this.request("/ready");
  }

  listCases(filter: {
    specialty?: string;
    from?: string;
    to?: string;
    q?: string;
    limit?: number;
    offset?: number;
  }): Promise<Page<CaseSummary>> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(filter)) {
      if (value !== undefined) params.set(key, String(value));
    }
    return this.request(`/cases?${params}`);
  }

  getCase(caseId: string): Promise<CaseResponse> {
    return this.request(`/cases/${encodeURIComponent(caseId)}`);
  }

  caseDetail(caseId: string): Promise<CaseDetail> {
    return this.request(`/cases/${encodeURIComponent(caseId)}/detail`);
  }

  mentions(limit = 100): Promise<Page<{ token: string; count: number }>> {
    return this.request(`/mentions?limit=${limit}`);
  }

  searchMentions(query: string): Promise<Page<string>> {
    return this.request(`/mentions/search?q=${encodeURIComponent(query)}`);
  }

  coords(space: Space, limit = 10000): Promise<Page<ScatterPoint> & { space: Space }> {
    return this.request(`/embedding/coords?space=${space}&limit=${limit}`);
  }

  glyph(caseId: string, k?: number): Promise<GlyphMetrics> {
    const suffix = k === undefined ? "" : `?k=${k}`;
    return this.request(`/glyph/${encodeURIComponent(caseId)}${suffix}`);
  }

  glyphPopulation(pair: PairKind, k?: number): Promise<{ pair: PairKind; k: number; stats: FiveNumber }> {
    const suffix = k === undefined ? "" : `&k=${k}`;
    return this.request(`/glyph/population?pair=${pair}${suffix}`);
  }

  groupLinks(ids: string[]): Promise<GroupLinks> {
    return this.post("/group-links", { ids });
  }

  solveLayout(body: LayoutRequest): Promise<LayoutResult> {
    return this.post("/layout", body);
  }

  listRecords(caseId?: string): Promise<Page<AnalysisRecord>> {
    const suffix = caseId ? `?caseId=${encodeURIComponent(caseId)}` : "";
    return this.request(`/records${suffix}`);
  }

  createRecord(body: {
    caseId: string;
    summary?: string;
    comments?: string;
    regionNotes?: unknown[];
    phase?: string;
  }): Promise<AnalysisRecord> {
    return this.post("/records", body);
  }

  patchRecord(recordId: number, patch: Record<string, unknown>): Promise<AnalysisRecord> {
    return this.request(`/records/${recordId}`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    });
  }

  exportUrl(format: "json" | "csv", caseId?: string): string {
    const params = new URLSearchParams({ format });
    if (caseId) params.set("caseId", caseId);
    return `${this.baseUrl}/records/export?${params}`;
  }
}
