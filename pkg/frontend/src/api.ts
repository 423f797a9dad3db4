// Typed client for the tuning service. Parameter values travel as
// decimal strings end to end; this module never turns them into
// numbers, so nothing can be lost to float formatting.

export type ParamVector = Record<string, string>;
export type Side = "first" | "second";

export interface RunPracticeAction {
  type: "run_practice";
  phase: string;
  index: number;
  of: number;
  params: ParamVector;
}

export interface PresentPairAction {
  type: "present_pair";
  pair_id: string;
  parameter: string;
  comparison_index: number;
  first: ParamVector;
  second: ParamVector;
}

export interface PresentEvalAction {
  type: "present_eval_trial";
  trial_id: string;
  index: number;
  of: number;
  first: ParamVector;
  second: ParamVector;
}

export interface DoneAction {
  type: "done";
}

export type Action =
  | RunPracticeAction
  | PresentPairAction
  | PresentEvalAction
  | DoneAction;

export interface ActivityEvent {
  agent: string;
  activity: string;
  t_start: number;
  t_end: number;
}

export interface HandoverRecordDoc {
  params: ParamVector;
  events: ActivityEvent[];
  success: boolean;
  failure_mode: string | null;
}

export interface TrajectoryPoint {
  t: number;
  pos: [number, number, number];
}

export interface PreviewPayload {
  record: HandoverRecordDoc;
  trajectory: TrajectoryPoint[];
}

export interface FluencyNumbers {
  r_idle: number;
  h_idle: number;
  c_act: number;
  f_del: number;
  total_time: number;
  n: number;
}

export interface Report {
  complete: boolean;
  phase: string;
  tuned: ParamVector | null;
  comparisons: { per_parameter: Record<string, number>; total: number };
  presentations: { per_parameter: Record<string, number>; total: number };
  handovers: { total: number; failed: number; success_rate: number };
  fluency: {
    practice1: FluencyNumbers | null;
    practice2: FluencyNumbers | null;
    delta: Record<string, number> | null;
  };
  evaluation: {
    total_correct: number;
    per_parameter: Record<string, number>;
  } | null;
}

export interface SpecDoc {
  name: string;
  unit: string;
  min: string;
  max: string;
  step: string;
}

export interface SessionConfigDoc {
  specs: SpecDoc[];
  seed: number;
  n_practice: number;
  [extra: string]: unknown;
}

export interface SessionState {
  session_id: string;
  phase: string;
  pending: Action | null;
  [extra: string]: unknown;
}

export interface Step {
  state: SessionState;
  next_action: Action;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function parseResponse<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let code = "http_error";
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      code = body.error ?? code;
      detail = body.detail ?? detail;
    } catch {
      // non-JSON error body, keep the status text
    }
    throw new ApiError(resp.status, code, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  // choices must be acknowledged before anything else is sent, so all
  // mutating requests go through one promise chain
  private chain: Promise<unknown> = Promise.resolve();

  constructor(
    private base: string,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private get<T>(path: string): Promise<T> {
    return this.fetchImpl(this.base + path).then((r) => parseResponse<T>(r));
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    const send = () =>
      this.fetchImpl(this.base + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body ?? {}),
      }).then((r) => parseResponse<T>(r));
    const next = this.chain.then(send, send);
    this.chain = next.catch(() => undefined);
    return next;
  }

  createSession(config?: object): Promise<{ session_id: string }> {
    return this.post("/api/sessions", config ? { config } : {});
  }

  listSessions(): Promise<{ sessions: string[] }> {
    return this.get("/api/sessions");
  }

  state(id: string): Promise<SessionState> {
    return this.get(`/api/sessions/${id}`);
  }

  action(id: string): Promise<Action> {
    return this.get(`/api/sessions/${id}/action`);
  }

  report(id: string): Promise<Report> {
    return this.get(`/api/sessions/${id}/report`);
  }

  config(id: string): Promise<SessionConfigDoc> {
    return this.get(`/api/sessions/${id}/config`);
  }

  preview(params: ParamVector, seed = 0): Promise<PreviewPayload> {
    const q = new URLSearchParams({
      params: JSON.stringify(params),
      seed: String(seed),
    });
    return this.get(`/api/preview?${q}`);
  }

  practiceDone(id: string): Promise<Step> {
    return this.post(`/api/sessions/${id}/practice-done`, {});
  }

  choice(id: string, pairId: string, side: Side): Promise<Step> {
    return this.post(`/api/sessions/${id}/choice`, {
      pair_id: pairId,
      side,
    });
  }

  failure(id: string, pairId: string): Promise<Step> {
    return this.post(`/api/sessions/${id}/failure`, { pair_id: pairId });
  }

  evalGuess(id: string, trialId: string, side: Side): Promise<Step> {
    return this.post(`/api/sessions/${id}/eval-guess`, {
      trial_id: trialId,
      side,
    });
  }
}
