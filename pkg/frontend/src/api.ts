/** Thin JSON client for the experiment server. */

import type { World, FrameLog } from "./kinematics.js";
import type { QuestionnairePrompts, SurveyPayload } from "./questionnaire.js";

export interface SessionInfo {
  session: string;
  ordinal: number;
  group: string;
  status: string;
}

export interface TrialPayload {
  trial_index: number;
  solo: boolean;
  duration: number;
  warning_lead: number;
  outliers: [number, number][];
  color: string | null;
  as_path: [number, number][] | null;
  questionnaire: QuestionnairePrompts;
  world: World;
}

export interface SubmitResult {
  truth: number;
  score_delta: number;
  cumulative_score: number;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, init);
  const body = await res.json();
  if (!res.ok) {
    throw new Error(`${body.error ?? res.status}: ${body.message ?? url}`);
  }
  return body as T;
}

function post<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class ApiClient {
  constructor(private base: string = "") {}

  createSession(): Promise<SessionInfo> {
    return post(`${this.base}/api/session`, {});
  }

  getTrial(session: string, index: number): Promise<TrialPayload> {
    return request(`${this.base}/api/session/${session}/trial/${index}`);
  }

  postFrames(
    session: string,
    index: number,
    frames: Partial<FrameLog> & { events?: unknown[] },
    final: boolean
  ): Promise<{ accepted: number; final: boolean; as_report?: number; color?: string }> {
    return post(`${this.base}/api/session/${session}/trial/${index}/frames`, {
      frames,
      final,
    });
  }

  postSurvey(session: string, index: number, survey: SurveyPayload): Promise<SubmitResult> {
    return post(`${this.base}/api/session/${session}/trial/${index}/survey`, survey);
  }

  getScore(session: string): Promise<{ cumulative_score: number; trial_cursor: number }> {
    return request(`${this.base}/api/session/${session}/score`);
  }
}
