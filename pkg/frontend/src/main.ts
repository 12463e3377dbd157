/** Session orchestration: tutorial, trials, questionnaire, score screens. */

import { ApiClient, TrialPayload } from "./api.js";
import { TrialRunner } from "./game.js";
import { World } from "./kinematics.js";
import { QuestionnaireFlow, Step } from "./questionnaire.js";
import { Scene } from "./render.js";
import { Phase, TOTAL_TRIALS, ViewState } from "./state.js";
import { TUTORIAL_STEPS } from "./tutorial.js";

const api = new ApiClient("");

function div(className: string, text = ""): HTMLDivElement {
  const node = document.createElement("div");
  node.className = className;
  if (text) {
    node.textContent = text;
  }
  return node;
}

class App {
  private root = document.getElementById("app") as HTMLDivElement;
  private panel = div("panel");
  private stage = div("stage");
  private scene: Scene | null = null;
  private view: ViewState | null = null;
  private session = "";
  private score = 0;

  async run(): Promise<void> {
    this.root.append(this.stage, this.panel);
    const info = await api.createSession();
    this.session = info.session;
    await this.tutorial();
    const first = await api.getTrial(this.session, 0);
    this.view = new ViewState(first.world.warning_lead);
    this.view.finishTutorial();
    let payload: TrialPayload | null = first;
    while (payload) {
      payload = await this.playTrial(payload);
    }
    this.panel.replaceChildren(
      div("headline", "All done"),
      div("body", `Final score: ${this.score}. Thank you for searching!`)
    );
  }

  private tutorial(): Promise<void> {
    return new Promise((resolve) => {
      let step = 0;
      const render = () => {
        const s = TUTORIAL_STEPS[step];
        const button = document.createElement("button");
        button.textContent = step + 1 < TUTORIAL_STEPS.length ? "Next" : "Start searching";
        button.onclick = () => {
          step += 1;
          if (step >= TUTORIAL_STEPS.length) {
            resolve();
          } else {
            render();
          }
        };
        this.panel.replaceChildren(
          div("headline", `${step + 1}/${TUTORIAL_STEPS.length} ${s.title}`),
          div("body", s.body),
          button
        );
      };
      render();
    });
  }

  private async playTrial(payload: TrialPayload): Promise<TrialPayload | null> {
    const view = this.view as ViewState;
    const world: World = payload.world;
    this.scene = new Scene(world);
    this.stage.replaceChildren(this.scene.svg);
    this.scene.setOutliers(payload.outliers);
    this.scene.setSearcher(payload.color);
    this.panel.replaceChildren(
      div("body", payload.solo ? "Search alone this round." : "Search together."),
      div("score", `Score: ${this.score}`)
    );

    const report = await this.runLoop(payload, world);
    view.trialFinished();
    const survey = await this.questionnaire(payload, report);
    if (view.phase === Phase.TrustSurvey) {
      view.trustSurveyComplete();
    }
    const result = await api.postSurvey(this.session, payload.trial_index, survey);
    this.score = result.cumulative_score;
    await this.scoreScreen(result.truth, result.score_delta);
    view.nextTrial();
    if (view.phase === Phase.Done || payload.trial_index + 1 >= TOTAL_TRIALS) {
      return null;
    }
    return api.getTrial(this.session, payload.trial_index + 1);
  }

  private runLoop(
    payload: TrialPayload,
    world: World
  ): Promise<{ as_report?: number; color?: string }> {
    return new Promise((resolve, reject) => {
      const scene = this.scene as Scene;
      const runner = new TrialRunner(
        world,
        this.session,
        payload.trial_index,
        payload.as_path,
        api,
        {
          onFrame: (state, _tick, remaining, warning) => {
            scene.moveSpotlight(state.x, state.y);
            scene.setTimer(remaining, warning);
            const v = this.view as ViewState;
            v.remaining = remaining;
          },
          onAsFrame: (x, y) => scene.moveSearcher(x, y),
          onDone: () => runner.uploaded().then(resolve, reject),
        }
      );
      window.addEventListener("keydown", runner.keydown);
      window.addEventListener("keyup", runner.keyup);
      window.addEventListener("blur", runner.blurred);
      const cleanup = () => {
        window.removeEventListener("keydown", runner.keydown);
        window.removeEventListener("keyup", runner.keyup);
        window.removeEventListener("blur", runner.blurred);
      };
      void (async () => {
        try {
          await runner.uploaded();
        } finally {
          cleanup();
        }
      })();
      runner.start();
    });
  }

  private async questionnaire(
    payload: TrialPayload,
    report: { as_report?: number; color?: string }
  ): Promise<ReturnType<QuestionnaireFlow["response"]>> {
    const view = this.view as ViewState;
    const flow = new QuestionnaireFlow(
      payload.questionnaire,
      payload.trial_index,
      report.as_report === undefined
        ? null
        : { color: report.color as string, count: report.as_report }
    );
    while (!flow.isComplete()) {
      const step = flow.current();
      await this.askStep(flow, step, view);
    }
    return flow.response(Date.now() / 1000);
  }

  private askStep(flow: QuestionnaireFlow, step: Step, view: ViewState): Promise<void> {
    return new Promise((resolve) => {
      const done = () => resolve();
      if (step.kind === "task_q1" || step.kind === "task_q2") {
        const input = document.createElement("input");
        input.type = "number";
        input.min = "0";
        const button = document.createElement("button");
        button.textContent = "Submit";
        const warn = div("warn");
        button.onclick = () => {
          if (flow.answerCount(Number(input.value))) {
            if (step.kind === "task_q2") {
              view.taskSurveyComplete();
            }
            done();
          } else {
            warn.textContent = "Enter a whole number of outliers.";
          }
        };
        this.panel.replaceChildren(div("headline", step.prompt), input, button, warn);
        input.focus();
      } else if (step.kind === "report_line") {
        view.showReportLine();
        const button = document.createElement("button");
        button.textContent = "Continue";
        button.onclick = () => {
          flow.acknowledgeReport();
          view.reportAcknowledged();
          done();
        };
        this.panel.replaceChildren(div("headline report-line", step.text), button);
      } else if (step.kind === "trust") {
        const headline = div("headline", step.statement);
        const row = div("likert-row");
        for (let value = step.scale.min; value <= step.scale.max; value++) {
          const button = document.createElement("button");
          button.textContent = String(value);
          button.onclick = () => {
            flow.answerTrust(value);
            done();
          };
          row.appendChild(button);
        }
        const labels = div(
          "scale-labels",
          `${step.scale.min} = ${step.scale.min_label}   …   ${step.scale.max} = ${step.scale.max_label}`
        );
        this.panel.replaceChildren(headline, row, labels);
      } else {
        done();
      }
    });
  }

  private scoreScreen(truth: number, delta: number): Promise<void> {
    return new Promise((resolve) => {
      const button = document.createElement("button");
      button.textContent = "Next trial";
      button.onclick = () => resolve();
      this.panel.replaceChildren(
        div("headline", `There were ${truth} outliers.`),
        div("body", `+${delta} points - cumulative score ${this.score}.`),
        button
      );
    });
  }
}

new App().run().catch((err) => {
  const root = document.getElementById("app");
  if (root) {
    root.textContent = `Session error: ${err}`;
  }
});
