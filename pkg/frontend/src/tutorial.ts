/** Scripted four-step tutorial overlay shown before the practice block. */

export interface TutorialStep {
  title: string;
  body: string;
}

export const TUTORIAL_STEPS: TutorialStep[] = [
  {
    title: "Move your spotlight",
    body:
      "Use the arrow keys to steer your spotlight. Holding a key builds up " +
      "speed; releasing it lets the spotlight coast to a stop. Only the area " +
      "inside your spotlight is visible.",
  },
  {
    title: "Beat the clock",
    body:
      "Each search lasts 20 seconds and the timer turns red for the final " +
      "five. There is not enough time to search the whole grid alone.",
  },
  {
    title: "Meet the autonomous searcher",
    body:
      "An autonomous searcher explores the grid with you and leaves a trail " +
      "over the areas it has covered. Searchers differ in color, in how they " +
      "move, and in how good they are at detecting outliers.",
  },
  {
    title: "Count the outliers",
    body:
      "After each search you will report how many outliers you found, see " +
      "how many the searcher reports, and estimate the grid's total. Closer " +
      "estimates earn more points.",
  },
];
