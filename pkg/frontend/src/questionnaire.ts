/**
 * Inter-trial questionnaire flow: task question 1, the searcher's report
 * line, task question 2, then the three trust statements on the 1..9 scale.
 * A pure state machine so the ordering contract is testable without a DOM;
 * progression is blocked until the current step has a valid answer.
 */

export interface QuestionnairePrompts {
  task_q1: string;
  task_q2: string;
  report_line_template: string | null;
  trust_statements: string[];
  scale: { min: number; max: number; min_label: string; max_label: string };
}

export type Step =
  | { kind: "task_q1"; prompt: string }
  | { kind: "report_line"; text: string }
  | { kind: "task_q2"; prompt: string }
  | { kind: "trust"; index: number; statement: string; scale: QuestionnairePrompts["scale"] }
  | { kind: "done" };

export interface SurveyPayload {
  trial_index: number;
  found_count: number;
  total_estimate: number;
  likert: number[];
  timestamp: number;
}

export class QuestionnaireFlow {
  private foundCount: number | null = null;
  private totalEstimate: number | null = null;
  private reportSeen = false;
  private likert: number[] = [];

  constructor(
    private prompts: QuestionnairePrompts,
    private trialIndex: number,
    private report: { color: string; count: number } | null
  ) {}

  get solo(): boolean {
    return this.report === null;
  }

  current(): Step {
    if (this.foundCount === null) {
      return { kind: "task_q1", prompt: this.prompts.task_q1 };
    }
    if (!this.solo && !this.reportSeen) {
      return { kind: "report_line", text: this.reportText() };
    }
    if (this.totalEstimate === null) {
      return { kind: "task_q2", prompt: this.prompts.task_q2 };
    }
    if (!this.solo && this.likert.length < this.prompts.trust_statements.length) {
      const index = this.likert.length;
      return {
        kind: "trust",
        index,
        statement: this.prompts.trust_statements[index],
        scale: this.prompts.scale,
      };
    }
    return { kind: "done" };
  }

  /** The displayed report line; the color name doubles as the colorblind label. */
  reportText(): string {
    if (!this.report || !this.prompts.report_line_template) {
      throw new Error("solo trials have no searcher report");
    }
    return this.prompts.report_line_template
      .replace("{color}", this.report.color)
      .replace("{count}", String(this.report.count));
  }

  /** Answer the active count question; false leaves the step unchanged. */
  answerCount(value: number): boolean {
    if (!Number.isInteger(value) || value < 0) {
      return false;
    }
    const step = this.current();
    if (step.kind === "task_q1") {
      this.foundCount = value;
      return true;
    }
    if (step.kind === "task_q2") {
      this.totalEstimate = value;
      return true;
    }
    return false;
  }

  acknowledgeReport(): boolean {
    if (this.current().kind !== "report_line") {
      return false;
    }
    this.reportSeen = true;
    return true;
  }

  answerTrust(value: number): boolean {
    const step = this.current();
    if (step.kind !== "trust") {
      return false;
    }
    const { min, max } = this.prompts.scale;
    if (!Number.isInteger(value) || value < min || value > max) {
      return false;
    }
    this.likert.push(value);
    return true;
  }

  isComplete(): boolean {
    return this.current().kind === "done";
  }

  response(timestamp: number): SurveyPayload {
    if (!this.isComplete()) {
      throw new Error("questionnaire is not complete");
    }
    return {
      trial_index: this.trialIndex,
      found_count: this.foundCount as number,
      total_estimate: this.totalEstimate as number,
      likert: [...this.likert],
      timestamp,
    };
  }
}
