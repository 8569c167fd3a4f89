/**
 * Typed client for the lexlearn gateway. Every payload is validated with
 * zod on the way in, so the rest of the UI can trust its shapes. The
 * fetch function is injectable for tests.
 */

import { z } from "zod";

export const ProductSchema = z.object({
  id: z.string(),
  label: z.string(),
  features: z.array(z.string()),
});

export const KgSchema = z.object({
  id: z.string(),
  products: z.array(ProductSchema),
  nodes: z.array(
    z.object({
      id: z.string(),
      label: z.string(),
      parent: z.string().nullable(),
      features: z.array(z.string()),
      extension: z.array(z.string()),
    }),
  ),
});

const BeliefSchema = z.record(z.string(), z.number());

export const CreateSessionSchema = z.object({
  session_id: z.string(),
  status: z.enum(["active", "converged", "exhausted"]),
  bundle: z.array(z.string()).nullable(),
  belief: BeliefSchema,
});

export const FeedbackSchema = z.object({
  status: z.enum(["active", "converged", "exhausted"]),
  belief: BeliefSchema,
  bundle: z.array(z.string()).nullable(),
  lexicon_entry: z
    .object({ node: z.string(), confidence: z.number() })
    .nullable(),
});

export const EigTableSchema = z.array(
  z.object({
    bundle: z.array(z.string()),
    eig: z.number(),
    predictive: z.record(z.string(), z.number()),
  }),
);

const ErrorSchema = z.object({
  code: z.string(),
  message: z.string(),
  detail: z.unknown(),
});

export type Kg = z.infer<typeof KgSchema>;
export type Product = z.infer<typeof ProductSchema>;
export type CreateSessionResponse = z.infer<typeof CreateSessionSchema>;
export type FeedbackResponse = z.infer<typeof FeedbackSchema>;
export type EigTable = z.infer<typeof EigTableSchema>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (resp.status >= 400) {
      const err = ErrorSchema.safeParse(payload);
      if (err.success) {
        throw new ApiError(resp.status, err.data.code, err.data.message);
      }
      throw new ApiError(resp.status, "unknown_error", `HTTP ${resp.status}`);
    }
    return payload;
  }

  async getKg(kgId: string): Promise<Kg> {
    return KgSchema.parse(await this.request("GET", `/kgs/${kgId}`));
  }

  async createSession(kgId: string, query: string): Promise<CreateSessionResponse> {
    return CreateSessionSchema.parse(
      await this.request("POST", "/sessions", { kg: kgId, query }),
    );
  }

  async submitFeedback(
    sessionId: string,
    clicked: string | null,
  ): Promise<FeedbackResponse> {
    return FeedbackSchema.parse(
      await this.request("POST", `/sessions/${sessionId}/feedback`, { clicked }),
    );
  }

  async getEigTable(sessionId: string): Promise<EigTable> {
    return EigTableSchema.parse(
      await this.request("GET", `/sessions/${sessionId}/eig`),
    );
  }
}
