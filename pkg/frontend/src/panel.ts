import { parseRat, toNumber } from "./rational";
import type { ClassifyResponse, MapParams } from "./types";

/** Everything the inspect panel draws, in plain data form so tests can
 * check it without a canvas.  All dynamical content (attractor, verdicts,
 * return structure) is copied verbatim from the classify response; the only
 * client-side geometry is plotting the user's own input map as y = x + g. */

export interface Segment {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface Bar {
  lo: number;
  hi: number;
  loExact: string;
  hiExact: string;
}

export interface Badge {
  stable: boolean;
  a1: boolean;
  a2: boolean;
  a3: boolean;
  matching: boolean;
  witnesses: string[];
}

export interface InspectPanel {
  graph: Segment[];
  xBars: Bar[];
  components: ClassifyResponse["components"];
  badge: Badge;
  status: string;
}

export function mapGraphSegments(map: MapParams): Segment[] {
  const beta = map.beta.map(parseRat);
  const gamma = map.gamma.map(parseRat);
  const out: Segment[] = [];
  for (let s = 0; s < gamma.length; s++) {
    const lo = toNumber(beta[s]!);
    const hi = toNumber(beta[s + 1]!);
    const g = toNumber(gamma[s]!);
    out.push({ x0: lo, y0: lo + g, x1: hi, y1: hi + g });
  }
  return out;
}

export function buildPanel(
  map: MapParams,
  resp: ClassifyResponse,
): InspectPanel {
  const witnesses: string[] = [];
  for (const v of [resp.A1, resp.A2, resp.A3, resp.matching]) {
    if (!v.ok && v.witness) witnesses.push(v.witness);
  }
  return {
    graph: mapGraphSegments(map),
    xBars: resp.X.map(([lo, hi]) => ({
      lo: toNumber(parseRat(lo)),
      hi: toNumber(parseRat(hi)),
      loExact: lo,
      hiExact: hi,
    })),
    components: resp.components,
    badge: {
      stable: resp.stable,
      a1: resp.A1.ok,
      a2: resp.A2.ok,
      a3: resp.A3.ok,
      matching: resp.matching.ok,
      witnesses,
    },
    status: resp.status,
  };
}
