/** View-state machine: screen ordering and the 5-second warning flag. */

import { describe, expect, it } from "vitest";

import { Phase, PRACTICE_TRIALS, TOTAL_TRIALS, ViewState } from "../src/state.js";

function throughTrial(view: ViewState): void {
  view.trialFinished();
  if (!view.solo) {
    view.showReportLine();
    view.reportAcknowledged();
  }
  view.taskSurveyComplete();
  if (!view.solo) {
    view.trustSurveyComplete();
  }
  view.nextTrial();
}

describe("phase transitions", () => {
  it("follows the questionnaire order through a main trial", () => {
    const view = new ViewState(5.0);
    view.finishTutorial();
    for (let i = 0; i < PRACTICE_TRIALS; i++) {
      expect(view.phase).toBe(Phase.SoloBlock);
      throughTrial(view);
    }
    expect(view.phase).toBe(Phase.Trial);
    view.trialFinished();
    expect(view.phase).toBe(Phase.TaskSurvey);
    view.showReportLine();
    expect(view.phase).toBe(Phase.ReportLine);
    view.reportAcknowledged();
    expect(view.phase).toBe(Phase.TaskSurvey);
    view.taskSurveyComplete();
    expect(view.phase).toBe(Phase.TrustSurvey);
    view.trustSurveyComplete();
    expect(view.phase).toBe(Phase.ScoreScreen);
    view.nextTrial();
    expect(view.phase).toBe(Phase.Trial);
  });

  it("solo trials route task survey straight to the score screen", () => {
    const view = new ViewState(5.0);
    view.finishTutorial();
    view.trialFinished();
    expect(() => view.showReportLine()).toThrow();
    view.taskSurveyComplete();
    expect(view.phase).toBe(Phase.ScoreScreen);
  });

  it("finishes after the last trial", () => {
    const view = new ViewState(5.0);
    view.finishTutorial();
    for (let i = 0; i < TOTAL_TRIALS; i++) {
      throughTrial(view);
    }
    expect(view.phase).toBe(Phase.Done);
  });

  it("rejects out-of-order transitions", () => {
    const view = new ViewState(5.0);
    expect(() => view.trialFinished()).toThrow();
    view.finishTutorial();
    expect(() => view.trustSurveyComplete()).toThrow();
    expect(() => view.nextTrial()).toThrow();
  });
});

describe("warning indicator", () => {
  it("activates exactly when remaining <= warning lead", () => {
    const view = new ViewState(5.0);
    view.finishTutorial();
    view.remaining = 10.0;
    expect(view.warningActive).toBe(false);
    view.remaining = 5.0;
    expect(view.warningActive).toBe(true);
    view.remaining = 4.9;
    expect(view.warningActive).toBe(true);
    view.trialFinished();
    expect(view.warningActive).toBe(false); // only during the trial screen
  });
});
