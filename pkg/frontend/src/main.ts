import { ApiClient, ServiceError } from "./api";
import { debounce } from "./debounce";
import { buildPanel, InspectPanel } from "./panel";
import { add, fmtRat, parseRat } from "./rational";
import {
  ViewState,
  initialState,
  pixelToParam,
  selectPoint,
  setSliderDelta,
  zoom,
} from "./state";
import { TILE_RES, colorFor, tilesForViewport } from "./tiles";
import type { MapParams } from "./types";

const CANVAS_SIZE = 512;
const PANEL_SIZE = 360;

const api = new ApiClient();
let vs: ViewState = initialState();
let currentMap: MapParams | null = null;

const $ = (id: string) => document.getElementById(id)!;
const banner = (msg: string) => {
  $("banner").textContent = msg;
  $("banner").classList.toggle("hidden", msg === "");
};

async function drawTiles(): Promise<void> {
  const canvas = $("plane") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  ctx.fillStyle = "#0c0c10";
  ctx.fillRect(0, 0, CANVAS_SIZE, CANVAS_SIZE);
  banner("");
  const specs = tilesForViewport(vs.viewport, vs.resolution);
  await Promise.all(
    specs.map(async (spec) => {
      let data;
      try {
        data = await api.tile(
          spec.region,
          TILE_RES,
          undefined,
          `${spec.z}/${spec.tx}/${spec.ty}`,
        );
      } catch (e) {
        if (e instanceof ServiceError && e.status === 503) {
          banner("service busy - retrying");
          return;
        }
        if ((e as Error).name === "AbortError") return;
        banner("service unreachable");
        return;
      }
      for (const cell of data.cells) {
        const a = num(parseRat(cell.a));
        const b = num(parseRat(cell.b));
        const [r, g, bl] = colorFor(cell);
        const sx = (a - num(vs.viewport.x0)) /
          (num(vs.viewport.x1) - num(vs.viewport.x0));
        const sy = (b - num(vs.viewport.y0)) /
          (num(vs.viewport.y1) - num(vs.viewport.y0));
        if (sx < 0 || sx > 1 || sy < 0 || sy > 1) continue;
        ctx.fillStyle = `rgb(${r},${g},${bl})`;
        const px = Math.round(sx * CANVAS_SIZE);
        const py = Math.round((1 - sy) * CANVAS_SIZE);
        const side = Math.max(2, CANVAS_SIZE / vs.resolution);
        ctx.fillRect(px, py - side, side, side);
      }
    }),
  );
}

function num(x: { n: bigint; d: bigint }): number {
  return Number(x.n) / Number(x.d);
}

function renderPanel(panel: InspectPanel): void {
  const badge = $("badge");
  badge.textContent = panel.badge.stable ? "stable" : "unstable";
  badge.className = panel.badge.stable ? "badge ok" : "badge bad";
  $("indicators").textContent = [
    `A1 ${panel.badge.a1 ? "ok" : "fail"}`,
    `A2 ${panel.badge.a2 ? "ok" : "fail"}`,
    `A3 ${panel.badge.a3 ? "ok" : "fail"}`,
    `Matching ${panel.badge.matching ? "ok" : "fail"}`,
  ].join("  ");
  $("witnesses").textContent = panel.badge.witnesses.join("\n");

  const canvas = $("dynplane") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  ctx.fillStyle = "#0c0c10";
  ctx.fillRect(0, 0, PANEL_SIZE, PANEL_SIZE);
  ctx.strokeStyle = "#3a3a46";
  ctx.strokeRect(0.5, 0.5, PANEL_SIZE - 1, PANEL_SIZE - 1);
  ctx.strokeStyle = "#7fb4ff";
  for (const s of panel.graph) {
    ctx.beginPath();
    ctx.moveTo(s.x0 * PANEL_SIZE, (1 - s.y0) * PANEL_SIZE);
    ctx.lineTo(s.x1 * PANEL_SIZE, (1 - s.y1) * PANEL_SIZE);
    ctx.stroke();
  }
  ctx.fillStyle = "#ffd166";
  for (const bar of panel.xBars) {
    ctx.fillRect(
      bar.lo * PANEL_SIZE,
      PANEL_SIZE - 8,
      (bar.hi - bar.lo) * PANEL_SIZE,
      6,
    );
  }
  $("xlist").textContent = panel.xBars
    .map((b) => `[${b.loExact}, ${b.hiExact})`)
    .join("  u  ");
}

async function inspect(map: MapParams): Promise<void> {
  currentMap = map;
  let resp;
  try {
    resp = await api.classify(map);
  } catch (e) {
    if (e instanceof ServiceError) {
      banner(`classify failed: ${e.code}`);
      return;
    }
    throw e;
  }
  renderPanel(buildPanel(map, resp));
  buildSliders(map);
}

function btMapParams(a: string, b: string): MapParams {
  // the two-parameter family's branch data, exactly as the scan endpoint
  // builds it: x + a on [0, 1-a), x + b on [1-a, 1-b), x + b - 1 on [1-b, 1)
  const minus = (
    x: { n: bigint; d: bigint },
    y: { n: bigint; d: bigint },
  ) => add(x, { n: -y.n, d: y.d });
  const ra = parseRat(a);
  const rb = parseRat(b);
  const one = parseRat("1");
  const cuts = ["0", fmtRat(minus(one, ra)), fmtRat(minus(one, rb)), "1"];
  const gs = [a, b, fmtRat(minus(rb, one))];
  // triangle corners collapse branches to zero length; drop them so the
  // request stays a valid partition
  const beta: string[] = [cuts[0]!];
  const gamma: string[] = [];
  for (let s = 0; s < gs.length; s++) {
    if (cuts[s] === cuts[s + 1]) continue;
    beta.push(cuts[s + 1]!);
    gamma.push(gs[s]!);
  }
  if (gamma.length === 0) return { beta: ["0", "1"], gamma: ["0"] };
  return { beta, gamma };
}

function buildSliders(map: MapParams): void {
  const host = $("sliders");
  host.replaceChildren();
  const labels = map.gamma.map((_, k) => `g${k + 1}`);
  labels.forEach((label, k) => {
    const row = document.createElement("div");
    const name = document.createElement("span");
    name.textContent = `${label} + `;
    const out = document.createElement("span");
    out.textContent = "0";
    const input = document.createElement("input");
    input.type = "range";
    input.min = "-64";
    input.max = "64";
    input.value = "0";
    const push = debounce(() => {
      if (!currentMap) return;
      const gamma = currentMap.gamma.slice();
      const d = vs.sliderDeltas[k];
      if (!d) return;
      gamma[k] = fmtRat(add(parseRat(gamma[k]!), d));
      void inspect({ beta: currentMap.beta, gamma });
    }, 200);
    input.addEventListener("input", () => {
      vs = setSliderDelta(vs, k, {
        n: BigInt(input.value),
        d: 1024n,
      });
      out.textContent = fmtRat(vs.sliderDeltas[k]!);
      push();
    });
    row.append(name, input, out);
    host.append(row);
  });
}

function wire(): void {
  const plane = $("plane") as HTMLCanvasElement;
  plane.addEventListener("click", (ev) => {
    const rect = plane.getBoundingClientRect();
    const { a, b } = pixelToParam(
      vs.viewport,
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      CANVAS_SIZE,
    );
    const next = selectPoint(vs, a, b);
    if (next === vs) {
      banner("pick a point inside the triangle (b <= a)");
      return;
    }
    vs = next;
    const sel = vs.selected!;
    $("selection").textContent = `(a, b) = (${fmtRat(sel.a)}, ${fmtRat(sel.b)})`;
    void inspect(btMapParams(fmtRat(sel.a), fmtRat(sel.b)));
  });
  plane.addEventListener("dblclick", (ev) => {
    const rect = plane.getBoundingClientRect();
    const { a, b } = pixelToParam(
      vs.viewport,
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      CANVAS_SIZE,
    );
    vs = zoom(vs, 2, a, b);
    void drawTiles();
  });
  $("reset").addEventListener("click", () => {
    vs = initialState();
    void drawTiles();
  });
  void drawTiles();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  wire();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", wire);
}
