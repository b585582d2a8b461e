/** Exact rationals for talking to the service: every parameter travels as a
 * "p/q" string and nothing on the client ever rounds through floats except
 * at the final pixel-placement step. */

export interface Rat {
  readonly n: bigint;
  readonly d: bigint; // always > 0
}

function gcd(a: bigint, b: bigint): bigint {
  a = a < 0n ? -a : a;
  b = b < 0n ? -b : b;
  while (b) {
    [a, b] = [b, a % b];
  }
  return a;
}

export function rat(n: bigint | number, d: bigint | number = 1n): Rat {
  let nn = BigInt(n);
  let dd = BigInt(d);
  if (dd === 0n) throw new Error("zero denominator");
  if (dd < 0n) {
    nn = -nn;
    dd = -dd;
  }
  const g = gcd(nn, dd) || 1n;
  return { n: nn / g, d: dd / g };
}

export function parseRat(s: string): Rat {
  const m = /^(-?\d+)(?:\/(\d+))?$/.exec(s.trim());
  if (!m) throw new Error(`not a rational: ${JSON.stringify(s)}`);
  return rat(BigInt(m[1]!), m[2] ? BigInt(m[2]) : 1n);
}

export function fmtRat(x: Rat): string {
  return x.d === 1n ? `${x.n}` : `${x.n}/${x.d}`;
}

export const ZERO = rat(0n);
export const ONE = rat(1n);

export function add(a: Rat, b: Rat): Rat {
  return rat(a.n * b.d + b.n * a.d, a.d * b.d);
}

export function sub(a: Rat, b: Rat): Rat {
  return rat(a.n * b.d - b.n * a.d, a.d * b.d);
}

export function mul(a: Rat, b: Rat): Rat {
  return rat(a.n * b.n, a.d * b.d);
}

export function cmp(a: Rat, b: Rat): number {
  const diff = a.n * b.d - b.n * a.d;
  return diff < 0n ? -1 : diff > 0n ? 1 : 0;
}

export function eq(a: Rat, b: Rat): boolean {
  return cmp(a, b) === 0;
}

export function toNumber(x: Rat): number {
  return Number(x.n) / Number(x.d);
}

function floorDiv(a: bigint, b: bigint): bigint {
  const q = a / b;
  return a % b !== 0n && (a < 0n) !== (b < 0n) ? q - 1n : q;
}

/** Nearest grid point i/res in [0, 1]; ties go down.  Used to snap a click
 * to the scan lattice the tiles were computed on. */
export function snapToGrid(x: Rat, res: number): Rat {
  const r = BigInt(res);
  // round(x * res) = floor(x * res + 1/2)
  let i = floorDiv(2n * x.n * r + x.d, 2n * x.d);
  if (i < 0n) i = 0n;
  if (i > r) i = r;
  return rat(i, r);
}

export const SLIDER_MAX_DEN = 1024n;

/** Snap a slider delta to a dyadic rational with denominator <= 1024 so the
 * classify request body is exact and cacheable. */
export function snapDelta(x: Rat): Rat {
  const i = floorDiv(2n * x.n * SLIDER_MAX_DEN + x.d, 2n * x.d);
  return rat(i, SLIDER_MAX_DEN);
}
