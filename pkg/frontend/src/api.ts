/** Typed fetch client for the exploration service. All UI data flows
 * through this module; the client never reads files directly. */
import type {
  DiffPayload,
  EventResponse,
  LayoutPayload,
  PlotPayload,
  SessionDto,
  SubspacePayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async datasets(): Promise<string[]> {
    const body = await asJson<{ datasets: string[] }>(
      await fetch(this.url("/datasets")),
    );
    return body.datasets;
  }

  layout(ds: string): Promise<LayoutPayload> {
    return fetch(this.url(`/datasets/${ds}/layout`)).then((r) =>
      asJson<LayoutPayload>(r),
    );
  }

  plot(ds: string, qoi: string): Promise<PlotPayload> {
    return fetch(this.url(`/datasets/${ds}/plots/${qoi}`)).then((r) =>
      asJson<PlotPayload>(r),
    );
  }

  subspace(ds: string, qoi: string): Promise<SubspacePayload> {
    return fetch(this.url(`/datasets/${ds}/subspace/${qoi}`)).then((r) =>
      asJson<SubspacePayload>(r),
    );
  }

  diff(ds: string, index: number): Promise<DiffPayload> {
    return fetch(this.url(`/datasets/${ds}/diff/${index}`)).then((r) =>
      asJson<DiffPayload>(r),
    );
  }

  /** Raw binary STL bytes for "nominal", "context", or a design index. */
  async geometry(ds: string, which: string | number): Promise<ArrayBuffer> {
    const resp = await fetch(this.url(`/datasets/${ds}/geometry/${which}`));
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return resp.arrayBuffer();
  }

  session(sid: string): Promise<SessionDto> {
    return fetch(this.url(`/session/${sid}`)).then((r) =>
      asJson<SessionDto>(r),
    );
  }

  postEvent(
    sid: string,
    op: string,
    args: Record<string, unknown>,
  ): Promise<EventResponse> {
    return fetch(this.url(`/session/${sid}/events`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ op, args }),
    }).then((r) => asJson<EventResponse>(r));
  }
}
