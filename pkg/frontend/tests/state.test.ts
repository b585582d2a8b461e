import { describe, expect, it } from "vitest";

import { fmtRat, parseRat, rat } from "../src/rational";
import {
  FULL_TRIANGLE,
  clampViewport,
  inTriangle,
  initialState,
  pixelToParam,
  selectPoint,
  setSliderDelta,
  zoom,
} from "../src/state";

const r = parseRat;

describe("viewport clamping", () => {
  it("keeps a sane window unchanged", () => {
    const v = { x0: r("1/4"), y0: r("0"), x1: r("3/4"), y1: r("1/2") };
    expect(clampViewport(v)).toEqual(v);
  });

  it("clips overshoot to the unit square", () => {
    const v = clampViewport({
      x0: r("-1/4"),
      y0: r("1/2"),
      x1: r("5/4"),
      y1: r("3/2"),
    });
    expect(fmtRat(v.x0)).toBe("0");
    expect(fmtRat(v.x1)).toBe("1");
    expect(fmtRat(v.y1)).toBe("1");
  });

  it("degenerate windows reset to the full triangle", () => {
    expect(
      clampViewport({ x0: r("2"), y0: r("0"), x1: r("3"), y1: r("1") }),
    ).toEqual(FULL_TRIANGLE);
  });
});

describe("click selection", () => {
  it("snaps to the current grid and records indices", () => {
    const vs = selectPoint(initialState(128), r("501/1000"), r("249/1000"));
    expect(vs.selected).not.toBeNull();
    expect(fmtRat(vs.selected!.a)).toBe("1/2");
    expect(fmtRat(vs.selected!.b)).toBe("1/4");
    expect(vs.selected!.i).toBe(64);
    expect(vs.selected!.j).toBe(32);
  });

  it("clicks outside the triangle are a no-op", () => {
    const vs0 = initialState(128);
    expect(selectPoint(vs0, r("1/4"), r("3/4"))).toBe(vs0);
  });

  it("re-clicking the same point returns the identical state", () => {
    const vs1 = selectPoint(initialState(128), r("1/2"), r("1/4"));
    const vs2 = selectPoint(vs1, r("1/2"), r("1/4"));
    expect(vs2).toBe(vs1);
  });

  it("selection resets slider deltas", () => {
    let vs = selectPoint(initialState(128), r("1/2"), r("1/4"));
    vs = setSliderDelta(vs, 0, r("1/3"));
    vs = selectPoint(vs, r("3/4"), r("1/4"));
    expect(vs.sliderDeltas).toEqual([]);
  });
});

describe("triangle membership", () => {
  it("accepts the boundary", () => {
    expect(inTriangle(r("1/2"), r("1/2"))).toBe(true);
    expect(inTriangle(r("1"), r("0"))).toBe(true);
  });
  it("rejects b > a and out-of-range", () => {
    expect(inTriangle(r("1/4"), r("1/2"))).toBe(false);
    expect(inTriangle(r("9/8"), r("0"))).toBe(false);
  });
});

describe("zoom", () => {
  it("shrinks the window and refines the grid together", () => {
    const vs = zoom(initialState(128), 4, r("1/2"), r("1/4"));
    expect(vs.resolution).toBe(512);
    expect(fmtRat(vs.viewport.x0)).toBe("3/8");
    expect(fmtRat(vs.viewport.x1)).toBe("5/8");
    expect(fmtRat(vs.viewport.y0)).toBe("1/8");
    expect(fmtRat(vs.viewport.y1)).toBe("3/8");
  });

  it("rejects silly factors", () => {
    expect(() => zoom(initialState(), 0, r("0"), r("0"))).toThrow();
  });

  it("old lattice points remain lattice points after zooming", () => {
    // the grid refines by an integer factor, so any i/128 is also i'/512
    const vs = zoom(initialState(128), 4, r("1/2"), r("1/4"));
    const p = rat(65n, 128n);
    expect(Number((p.n * BigInt(vs.resolution)) % p.d)).toBe(0);
  });
});

describe("pixel mapping", () => {
  it("inverts the corners of the viewport", () => {
    const v = { x0: r("1/4"), y0: r("0"), x1: r("3/4"), y1: r("1/2") };
    const tl = pixelToParam(v, 0, 0, 512);
    expect(fmtRat(tl.a)).toBe("1/4");
    expect(fmtRat(tl.b)).toBe("1/2");
    const br = pixelToParam(v, 512, 512, 512);
    expect(fmtRat(br.a)).toBe("3/4");
    expect(fmtRat(br.b)).toBe("0");
  });
});

describe("slider deltas", () => {
  it("snap to dyadics with denominator <= 1024", () => {
    const vs = setSliderDelta(initialState(), 1, r("1/3"));
    expect(vs.sliderDeltas.length).toBe(2);
    expect(1024n % vs.sliderDeltas[1]!.d).toBe(0n);
    expect(fmtRat(vs.sliderDeltas[0]!)).toBe("0");
  });

  it("zero stays exactly zero", () => {
    const vs = setSliderDelta(initialState(), 0, r("0"));
    expect(fmtRat(vs.sliderDeltas[0]!)).toBe("0");
  });
});
