/**
 * SVG scene: a 700-unit logical field scaled uniformly to the viewport.
 * The grid sits under an opacity mask so circles are visible only inside
 * the subject's spotlight; the searcher is an opaque disk that leaves a
 * translucent trail over the areas it has covered.
 */

import { World } from "./kinematics.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {}
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) {
    node.setAttribute(k, String(v));
  }
  return node;
}

export class Scene {
  readonly svg: SVGSVGElement;
  private spotlight: SVGCircleElement;
  private spotHole: SVGCircleElement;
  private searcher: SVGCircleElement;
  private searcherLabel: SVGTextElement;
  private trail: SVGPolylineElement;
  private timer: SVGTextElement;
  private trailPoints: string[] = [];

  constructor(private world: World) {
    const size = world.field_size;
    this.svg = el("svg", {
      viewBox: `0 0 ${size} ${size}`,
      width: "100%",
      height: "100%",
      "data-role": "field",
    });
    this.svg.style.maxHeight = "92vh";
    this.svg.style.aspectRatio = "1";

    const defs = el("defs");
    const mask = el("mask", { id: "reveal" });
    mask.appendChild(el("rect", { x: 0, y: 0, width: size, height: size, fill: "black" }));
    this.spotHole = el("circle", { r: world.agent_radius, fill: "white" });
    mask.appendChild(this.spotHole);
    defs.appendChild(mask);
    this.svg.appendChild(defs);

    this.svg.appendChild(
      el("rect", { x: 0, y: 0, width: size, height: size, fill: "#14141c" })
    );

    const grid = el("g", { mask: "url(#reveal)" });
    const half = world.cell_pitch / 2;
    for (let row = 0; row < world.grid_dim; row++) {
      for (let col = 0; col < world.grid_dim; col++) {
        grid.appendChild(
          el("circle", {
            cx: half + col * world.cell_pitch,
            cy: half + row * world.cell_pitch,
            r: world.outlier_radius,
            fill: "#7a3fbf",
            "data-cell": `${col},${row}`,
          })
        );
      }
    }
    this.gridGroup = grid;
    this.svg.appendChild(grid);

    this.trail = el("polyline", {
      fill: "none",
      stroke: "#d88f3f55",
      "stroke-width": 2 * world.agent_radius,
      "stroke-linecap": "round",
      "stroke-linejoin": "round",
    });
    this.svg.appendChild(this.trail);

    this.searcher = el("circle", { r: world.agent_radius, fill: "#666", visibility: "hidden" });
    this.svg.appendChild(this.searcher);
    this.searcherLabel = el("text", {
      "font-size": 22,
      fill: "#eee",
      "text-anchor": "middle",
      "data-role": "color-name",
    });
    this.svg.appendChild(this.searcherLabel);

    this.spotlight = el("circle", {
      r: world.agent_radius,
      fill: "none",
      stroke: "#f4f4f4",
      "stroke-width": 3,
    });
    this.svg.appendChild(this.spotlight);

    this.timer = el("text", {
      x: size - 14,
      y: 34,
      "font-size": 28,
      fill: "#eee",
      "text-anchor": "end",
      "data-role": "timer",
    });
    this.svg.appendChild(this.timer);
  }

  private gridGroup: SVGGElement;

  /** Show outliers for this trial by recoloring their centers. */
  setOutliers(cells: [number, number][]): void {
    const marked = new Set(cells.map(([c, r]) => `${c},${r}`));
    for (const node of Array.from(this.gridGroup.children) as SVGCircleElement[]) {
      const key = node.getAttribute("data-cell") ?? "";
      node.setAttribute("fill", marked.has(key) ? "#e07020" : "#7a3fbf");
    }
  }

  /** The searcher is identified by color plus its printed name. */
  setSearcher(color: string | null): void {
    this.trailPoints = [];
    this.trail.setAttribute("points", "");
    if (color === null) {
      this.searcher.setAttribute("visibility", "hidden");
      this.searcherLabel.textContent = "";
      return;
    }
    this.searcher.setAttribute("visibility", "visible");
    this.searcher.setAttribute("fill", color);
    this.searcherLabel.textContent = color;
  }

  moveSpotlight(x: number, y: number): void {
    this.spotlight.setAttribute("cx", String(x));
    this.spotlight.setAttribute("cy", String(y));
    this.spotHole.setAttribute("cx", String(x));
    this.spotHole.setAttribute("cy", String(y));
  }

  moveSearcher(x: number, y: number): void {
    this.searcher.setAttribute("cx", String(x));
    this.searcher.setAttribute("cy", String(y));
    this.searcherLabel.setAttribute("x", String(x));
    this.searcherLabel.setAttribute("y", String(y - this.world.agent_radius - 8));
    this.trailPoints.push(`${x},${y}`);
    if (this.trailPoints.length % 3 === 0) {
      this.trail.setAttribute("points", this.trailPoints.join(" "));
    }
  }

  setTimer(remaining: number, warning: boolean): void {
    this.timer.textContent = remaining.toFixed(1);
    this.timer.setAttribute("fill", warning ? "#e04040" : "#eee");
    this.timer.setAttribute("data-warning", warning ? "1" : "0");
  }
}
