import {
  ONE,
  Rat,
  ZERO,
  cmp,
  eq,
  rat,
  snapDelta,
  snapToGrid,
  sub,
  add,
  mul,
  toNumber,
} from "./rational";

/** Axis-aligned window into the (a, b) parameter triangle 0 <= b <= a <= 1. */
export interface Viewport {
  x0: Rat;
  y0: Rat;
  x1: Rat;
  y1: Rat;
}

export interface Selection {
  a: Rat;
  b: Rat;
  i: number;
  j: number;
  res: number;
}

export interface ViewState {
  viewport: Viewport;
  resolution: number;
  selected: Selection | null;
  overlayN: number;
  sliderDeltas: Rat[]; // one per free map parameter
}

export const FULL_TRIANGLE: Viewport = { x0: ZERO, y0: ZERO, x1: ONE, y1: ONE };

export function initialState(resolution = 128): ViewState {
  return {
    viewport: FULL_TRIANGLE,
    resolution,
    selected: null,
    overlayN: 1,
    sliderDeltas: [],
  };
}

function clamp01(x: Rat): Rat {
  if (cmp(x, ZERO) < 0) return ZERO;
  if (cmp(x, ONE) > 0) return ONE;
  return x;
}

export function clampViewport(v: Viewport): Viewport {
  const x0 = clamp01(v.x0);
  const x1 = clamp01(v.x1);
  const y0 = clamp01(v.y0);
  const y1 = clamp01(v.y1);
  if (cmp(x0, x1) >= 0 || cmp(y0, y1) >= 0) return FULL_TRIANGLE;
  return { x0, y0, x1, y1 };
}

export function inTriangle(a: Rat, b: Rat): boolean {
  return (
    cmp(ZERO, b) <= 0 && cmp(b, a) <= 0 && cmp(a, ONE) <= 0
  );
}

/** Click handling: snap to the current grid, refuse points outside the
 * triangle (no-op), and keep re-clicks idempotent. */
export function selectPoint(vs: ViewState, a: Rat, b: Rat): ViewState {
  const sa = snapToGrid(a, vs.resolution);
  const sb = snapToGrid(b, vs.resolution);
  if (!inTriangle(sa, sb)) return vs;
  const i = Number(sa.n * BigInt(vs.resolution) / sa.d);
  const j = Number(sb.n * BigInt(vs.resolution) / sb.d);
  const sel: Selection = { a: sa, b: sb, i, j, res: vs.resolution };
  if (
    vs.selected &&
    eq(vs.selected.a, sa) &&
    eq(vs.selected.b, sb) &&
    vs.selected.res === vs.resolution
  ) {
    return vs;
  }
  return { ...vs, selected: sel, sliderDeltas: [] };
}

/** Zoom about a center point: the window shrinks by `factor` and the grid
 * refines by the same factor so tile colors stay comparable on overlap. */
export function zoom(vs: ViewState, factor: number, cx: Rat, cy: Rat): ViewState {
  if (factor <= 0 || !Number.isInteger(factor)) {
    throw new Error("zoom factor must be a positive integer");
  }
  const f = rat(1n, BigInt(factor));
  const w = mul(sub(vs.viewport.x1, vs.viewport.x0), f);
  const h = mul(sub(vs.viewport.y1, vs.viewport.y0), f);
  const half = rat(1n, 2n);
  const viewport = clampViewport({
    x0: sub(cx, mul(w, half)),
    x1: add(cx, mul(w, half)),
    y0: sub(cy, mul(h, half)),
    y1: add(cy, mul(h, half)),
  });
  return { ...vs, viewport, resolution: vs.resolution * factor };
}

export function setSliderDelta(
  vs: ViewState,
  index: number,
  value: Rat,
): ViewState {
  const deltas = vs.sliderDeltas.slice();
  while (deltas.length <= index) deltas.push(ZERO);
  deltas[index] = snapDelta(value);
  return { ...vs, sliderDeltas: deltas };
}

/** Pixel -> parameter plane for a square canvas; b grows upward. */
export function pixelToParam(
  v: Viewport,
  px: number,
  py: number,
  size: number,
): { a: Rat; b: Rat } {
  const t = (x: number) => rat(BigInt(Math.round(x * 1_000_000)), 1_000_000n);
  const fx = t(px / size);
  const fy = t(1 - py / size);
  return {
    a: add(v.x0, mul(sub(v.x1, v.x0), fx)),
    b: add(v.y0, mul(sub(v.y1, v.y0), fy)),
  };
}

export function viewportWidthPx(v: Viewport, size: number): number {
  return toNumber(sub(v.x1, v.x0)) * size;
}
