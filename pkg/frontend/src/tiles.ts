import { fmtRat, rat } from "./rational";
import type { Viewport } from "./state";
import type { TileCell } from "./types";
import type { TileRegion } from "./api";

/** Tile scheduling: cover the viewport with dyadic squares of side 1/2^z,
 * each requested at a fixed per-tile resolution that stays under the
 * service's synchronous limit.  Because the service classifies a lattice
 * cell identically no matter which region asked for it, colors on tile
 * overlaps agree by construction — the client just has to color a given
 * fingerprint deterministically. */

export const TILE_RES = 32;

export interface TileSpec {
  z: number;
  tx: number;
  ty: number;
  region: TileRegion;
  /** lattice resolution of the full plane this tile slices */
  planeRes: number;
}

export function zoomLevelFor(planeRes: number): number {
  let z = 0;
  while (TILE_RES << z < planeRes) z++;
  return z;
}

export function tilesForViewport(v: Viewport, planeRes: number): TileSpec[] {
  const z = zoomLevelFor(planeRes);
  const parts = 1 << z;
  const lo = (x: { n: bigint; d: bigint }) =>
    Math.floor((Number(x.n) / Number(x.d)) * parts);
  const hi = (x: { n: bigint; d: bigint }) =>
    Math.ceil((Number(x.n) / Number(x.d)) * parts);
  const out: TileSpec[] = [];
  for (let ty = Math.max(0, lo(v.y0)); ty < Math.min(parts, hi(v.y1)); ty++) {
    for (let tx = Math.max(0, lo(v.x0)); tx < Math.min(parts, hi(v.x1)); tx++) {
      if (ty > tx + 1) continue; // entirely above the triangle diagonal
      out.push({
        z,
        tx,
        ty,
        planeRes,
        region: {
          x0: fmtRat(rat(BigInt(tx), BigInt(parts))),
          y0: fmtRat(rat(BigInt(ty), BigInt(parts))),
          x1: fmtRat(rat(BigInt(tx + 1), BigInt(parts))),
          y1: fmtRat(rat(BigInt(ty + 1), BigInt(parts))),
        },
      });
    }
  }
  return out;
}

export type Rgb = [number, number, number];

const UNSTABLE: Rgb = [225, 60, 50];
const UNDETERMINED: Rgb = [128, 128, 128];

function fnv1a(s: string): number {
  let h = 0x811c9dc5;
  for (let k = 0; k < s.length; k++) {
    h ^= s.charCodeAt(k);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h;
}

/** Deterministic per-fingerprint color: unstable cells share one alarm
 * color, stable cells get a muted hue hashed from their return-structure
 * fingerprint so equal structure always renders identically. */
export function colorFor(cell: Pick<TileCell, "tag" | "fingerprint">): Rgb {
  if (cell.tag === "FiniteUnstable") return UNSTABLE;
  if (cell.tag === "Undetermined") return UNDETERMINED;
  const h = fnv1a(cell.fingerprint);
  const byte = (k: number) => (h >>> (k * 8)) & 0xff;
  return [
    80 + Math.floor((byte(0) * 11) / 16),
    80 + Math.floor((byte(1) * 11) / 16),
    80 + Math.floor((byte(2) * 11) / 16),
  ];
}

export function cellKey(cell: TileCell): string {
  return `${cell.a},${cell.b}`;
}
