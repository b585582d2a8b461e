import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { buildPanel, mapGraphSegments } from "../src/panel";
import type { ClassifyResponse } from "../src/types";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = (name: string): ClassifyResponse =>
  JSON.parse(readFileSync(join(here, "..", "fixtures", name), "utf8"));

// recorded verbatim from POST /api/v1/classify for the cell (a, b) = (1/2, 1/4)
const UNSTABLE = fixture("classify_unstable_cell.json");
// and for the stable three-branch reference map
const STABLE = fixture("classify_stable_fig.json");

const UNSTABLE_MAP = {
  beta: ["0", "1/2", "3/4", "1"],
  gamma: ["1/2", "1/4", "-3/4"],
};

describe("inspect panel from a recorded unstable-cell response", () => {
  const panel = buildPanel(UNSTABLE_MAP, UNSTABLE);

  it("shows the unstable badge with per-check indicators", () => {
    expect(panel.badge.stable).toBe(false);
    expect(panel.badge.a1).toBe(false);
    expect(panel.badge.a2).toBe(false);
    expect(panel.badge.a3).toBe(true);
    expect(panel.badge.matching).toBe(true);
  });

  it("renders exactly the two attractor bars from the response", () => {
    expect(panel.xBars.map((b) => [b.loExact, b.hiExact])).toEqual([
      ["0", "1/4"],
      ["1/2", "1"],
    ]);
    expect(panel.xBars[0]!.lo).toBe(0);
    expect(panel.xBars[0]!.hi).toBe(0.25);
  });

  it("keeps component data verbatim", () => {
    expect(panel.components).toBe(UNSTABLE.components);
    expect(panel.components[1]!.rotation).toEqual({ number: "1/2" });
  });

  it("collects witnesses of failing checks only", () => {
    expect(panel.badge.witnesses.length).toBe(2);
    for (const w of panel.badge.witnesses) {
      expect(w).toContain("1/2+");
    }
  });
});

describe("inspect panel from a recorded stable response", () => {
  const panel = buildPanel(
    { beta: ["0", "1/3", "2/3", "1"], gamma: ["1/3", "1/7", "-1/2"] },
    STABLE,
  );

  it("shows the stable badge and no witnesses", () => {
    expect(panel.badge.stable).toBe(true);
    expect(panel.badge.witnesses).toEqual([]);
  });

  it("keeps exact interval strings alongside pixel values", () => {
    expect(panel.xBars.map((b) => [b.loExact, b.hiExact])).toEqual([
      ["1/6", "13/42"],
      ["1/2", "17/21"],
    ]);
  });
});

describe("map graph", () => {
  it("draws one segment per branch, y = x + gamma", () => {
    const segs = mapGraphSegments(UNSTABLE_MAP);
    expect(segs.length).toBe(3);
    expect(segs[0]).toEqual({ x0: 0, y0: 0.5, x1: 0.5, y1: 1 });
    expect(segs[2]!.y0).toBeCloseTo(0, 12);
  });

  it("is idempotent: same input, same panel content", () => {
    const p1 = buildPanel(UNSTABLE_MAP, UNSTABLE);
    const p2 = buildPanel(UNSTABLE_MAP, UNSTABLE);
    expect(p2).toEqual(p1);
  });
});
