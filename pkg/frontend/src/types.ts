/** Wire types for the /api/v1 service.  All rationals are "p/q" strings;
 * the client never converts them back to floats except to place pixels. */

export interface MapParams {
  beta: string[];
  gamma: string[];
}

export interface Verdict {
  ok: boolean;
  witness: string | null;
}

export interface BranchInfo {
  domain: [string, string];
  return_time: number;
  translation: string;
  image: [string, string];
}

export interface LandingInfo {
  a: string;
  l: number;
  plus_chain: [string, number][];
  minus_chain: [string, number][];
}

export interface ComponentInfo {
  J: [string, string];
  branches: BranchInfo[];
  landings: LandingInfo[];
  sigma: number[];
  tau: number[];
  rotation: { number: string | null } | null;
}

export interface ClassifyResponse {
  status: string;
  X: [string, string][];
  n: number;
  stable: boolean;
  A1: Verdict;
  A2: Verdict;
  A3: Verdict;
  matching: Verdict;
  components: ComponentInfo[];
}

export interface TileCell {
  i: number;
  j: number;
  a: string;
  b: string;
  tag: string;
  fingerprint: string;
  nStable: number;
}

export interface TileData {
  header: {
    resolution: number;
    region: [string, string, string, string];
    budget: number | null;
    cells: number;
    version: string;
  };
  cells: TileCell[];
}

export interface ServiceError {
  error: { code: string; detail: unknown };
}
