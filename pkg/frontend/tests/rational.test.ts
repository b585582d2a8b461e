import { describe, expect, it } from "vitest";

import {
  SLIDER_MAX_DEN,
  add,
  cmp,
  fmtRat,
  parseRat,
  rat,
  snapDelta,
  snapToGrid,
  sub,
} from "../src/rational";

describe("parse/format round trip", () => {
  it("handles integers, fractions and negatives", () => {
    for (const s of ["0", "1", "-1", "1/3", "-5/7", "13/42"]) {
      expect(fmtRat(parseRat(s))).toBe(s);
    }
  });

  it("normalizes", () => {
    expect(fmtRat(parseRat("6/8"))).toBe("3/4");
    expect(fmtRat(rat(-2n, -4n))).toBe("1/2");
  });

  it("rejects junk", () => {
    for (const s of ["", "a", "1/0", "1.5", "1/ 2"]) {
      expect(() => parseRat(s)).toThrow();
    }
  });
});

describe("exact arithmetic", () => {
  it("adds and subtracts without float error", () => {
    const x = parseRat("1/3");
    const y = parseRat("1/6");
    expect(fmtRat(add(x, y))).toBe("1/2");
    expect(fmtRat(sub(x, y))).toBe("1/6");
  });

  it("orders correctly near equal values", () => {
    expect(cmp(parseRat("1/3"), parseRat("333333/1000000"))).toBe(1);
  });
});

describe("grid snapping", () => {
  it("snaps to the nearest lattice point", () => {
    expect(fmtRat(snapToGrid(parseRat("13/100"), 8))).toBe("1/8");
    expect(fmtRat(snapToGrid(parseRat("12/100"), 8))).toBe("1/8");
    expect(fmtRat(snapToGrid(parseRat("5/100"), 8))).toBe("0");
  });

  it("clamps to [0, 1]", () => {
    expect(fmtRat(snapToGrid(parseRat("-1/10"), 8))).toBe("0");
    expect(fmtRat(snapToGrid(parseRat("11/10"), 8))).toBe("1");
  });

  it("is idempotent on lattice points", () => {
    for (let i = 0; i <= 16; i++) {
      const p = rat(BigInt(i), 16n);
      expect(snapToGrid(p, 16)).toEqual(p);
    }
  });
});

describe("slider delta snapping", () => {
  it("lands on denominator 2^k <= 1024", () => {
    for (const s of ["1/3", "-2/7", "355/1130", "1/2048"]) {
      const d = snapDelta(parseRat(s));
      expect(SLIDER_MAX_DEN % d.d).toBe(0n);
    }
  });

  it("keeps exact dyadics", () => {
    expect(fmtRat(snapDelta(parseRat("3/512")))).toBe("3/512");
    expect(fmtRat(snapDelta(parseRat("-1/1024")))).toBe("-1/1024");
  });

  it("moves by at most half a step", () => {
    for (const s of ["1/3", "-9/13", "977/1000"]) {
      const x = parseRat(s);
      const err = sub(snapDelta(x), x);
      const bound = rat(1n, 2048n);
      expect(cmp(err, bound) <= 0).toBe(true);
      expect(cmp(err, rat(-1n, 2048n)) >= 0).toBe(true);
    }
  });
});
