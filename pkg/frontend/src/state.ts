/**
 * Session view state: which screen is active and where the subject is in
 * the trial sequence. Solo practice trials skip the report line and the
 * trust survey; the score screen closes every trial.
 */

export enum Phase {
  Tutorial = "Tutorial",
  SoloBlock = "SoloBlock",
  Trial = "Trial",
  TaskSurvey = "TaskSurvey",
  ReportLine = "ReportLine",
  TrustSurvey = "TrustSurvey",
  ScoreScreen = "ScoreScreen",
  Done = "Done",
}

export const PRACTICE_TRIALS = 9;
export const TOTAL_TRIALS = 72;

export class ViewState {
  phase: Phase = Phase.Tutorial;
  trialIndex = 0;
  remaining = 0;

  constructor(private warningLead: number) {}

  /** Warning indicator is active exactly when remaining <= warning lead. */
  get warningActive(): boolean {
    return this.phase === this.trialPhase() && this.remaining <= this.warningLead;
  }

  get solo(): boolean {
    return this.trialIndex < PRACTICE_TRIALS;
  }

  private trialPhase(): Phase {
    return this.solo ? Phase.SoloBlock : Phase.Trial;
  }

  private expect(expected: Phase, next: Phase): void {
    if (this.phase !== expected) {
      throw new Error(`cannot move to ${next} from ${this.phase}`);
    }
    this.phase = next;
  }

  finishTutorial(): void {
    this.expect(Phase.Tutorial, this.trialPhase());
  }

  trialFinished(): void {
    this.expect(this.trialPhase(), Phase.TaskSurvey);
  }

  showReportLine(): void {
    if (this.solo) {
      throw new Error("solo trials have no searcher report");
    }
    this.expect(Phase.TaskSurvey, Phase.ReportLine);
  }

  reportAcknowledged(): void {
    this.expect(Phase.ReportLine, Phase.TaskSurvey);
  }

  taskSurveyComplete(): void {
    this.expect(Phase.TaskSurvey, this.solo ? Phase.ScoreScreen : Phase.TrustSurvey);
  }

  trustSurveyComplete(): void {
    this.expect(Phase.TrustSurvey, Phase.ScoreScreen);
  }

  nextTrial(): void {
    if (this.phase !== Phase.ScoreScreen) {
      throw new Error(`cannot advance trials from ${this.phase}`);
    }
    this.trialIndex += 1;
    this.phase = this.trialIndex >= TOTAL_TRIALS ? Phase.Done : this.trialPhase();
  }
}
