import type {
  ClassifyResponse,
  MapParams,
  TileCell,
  TileData,
} from "./types";

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: unknown,
  ) {
    super(`${code} (${status})`);
  }
}

export type FetchFn = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

/** First line is a JSON header, the rest is the cell CSV. */
export function parseTileCsv(text: string): TileData {
  const lines = text.split("\n").filter((ln) => ln.length > 0);
  if (lines.length < 2) throw new Error("malformed tile payload");
  const header = JSON.parse(lines[0]!);
  const cols = lines[1]!.split(",");
  if (cols.join(",") !== "i,j,a,b,tag,fingerprint,n_stable") {
    throw new Error(`unexpected tile columns: ${lines[1]}`);
  }
  const cells: TileCell[] = lines.slice(2).map((ln) => {
    const [i, j, a, b, tag, fingerprint, nStable] = ln.split(",");
    return {
      i: Number(i),
      j: Number(j),
      a: a!,
      b: b!,
      tag: tag!,
      fingerprint: fingerprint!,
      nStable: Number(nStable),
    };
  });
  return { header, cells };
}

async function raise(res: Response): Promise<never> {
  let code = "http-error";
  let detail: unknown = null;
  try {
    const body = await res.json();
    if (body && body.error) {
      code = body.error.code;
      detail = body.error.detail;
    } else {
      detail = body;
    }
  } catch {
    /* non-JSON body */
  }
  throw new ServiceError(res.status, code, detail);
}

export interface TileRegion {
  x0: string;
  y0: string;
  x1: string;
  y1: string;
}

/** Thin typed client with in-flight de-duplication: rapid repeat requests
 * for the same resource share one fetch, and stale tile requests can be
 * cancelled when the viewport has already moved on. */
export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();
  private tileAborts = new Map<string, AbortController>();

  constructor(
    private base: string = "/api/v1",
    private fetchFn: FetchFn = (u, i) => fetch(u, i),
    private pollMs: number = 250,
  ) {}

  inflightCount(): number {
    return this.inflight.size;
  }

  private dedupe<T>(key: string, run: () => Promise<T>): Promise<T> {
    const existing = this.inflight.get(key);
    if (existing) return existing as Promise<T>;
    const p = run().finally(() => this.inflight.delete(key));
    this.inflight.set(key, p);
    return p;
  }

  classify(
    map: MapParams,
    budget?: number,
  ): Promise<ClassifyResponse> {
    const body = JSON.stringify({ map, budget: budget ?? null, full: false });
    return this.dedupe(`classify:${body}`, async () => {
      const res = await this.fetchFn(`${this.base}/classify`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body,
      });
      if (!res.ok) await raise(res);
      return (await res.json()) as ClassifyResponse;
    });
  }

  /** Fetch one tile; large resolutions come back as a job to poll.  A new
   * request for the same slot key aborts the previous one. */
  async tile(
    region: TileRegion,
    res: number,
    budget?: number,
    slot?: string,
  ): Promise<TileData> {
    const params = new URLSearchParams({
      x0: region.x0,
      y0: region.y0,
      x1: region.x1,
      y1: region.y1,
      res: String(res),
    });
    if (budget !== undefined) params.set("budget", String(budget));
    const url = `${this.base}/bt/tile?${params}`;
    let signal: AbortSignal | undefined;
    if (slot !== undefined) {
      this.tileAborts.get(slot)?.abort();
      const ctl = new AbortController();
      this.tileAborts.set(slot, ctl);
      signal = ctl.signal;
    }
    return this.dedupe(`tile:${url}`, async () => {
      const first = await this.fetchFn(url, { signal });
      if (!first.ok) await raise(first);
      if (first.status === 202) {
        const { job } = await first.json();
        return this.pollJob(job, signal);
      }
      return parseTileCsv(await first.text());
    });
  }

  private async pollJob(
    job: string,
    signal?: AbortSignal,
  ): Promise<TileData> {
    for (;;) {
      const res = await this.fetchFn(`${this.base}/jobs/${job}`, { signal });
      if (!res.ok) await raise(res);
      const type = res.headers.get("content-type") ?? "";
      if (type.startsWith("text/csv")) return parseTileCsv(await res.text());
      await new Promise((r) => setTimeout(r, this.pollMs));
    }
  }

  imageUrl(res: number, fmt: "png" | "ppm" = "png"): string {
    return `${this.base}/bt/image?res=${res}&fmt=${fmt}`;
  }
}
