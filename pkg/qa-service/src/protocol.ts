// Scorer wire protocol v1: length-delimited UTF-8 JSON records.
// Frame = ASCII decimal byte length of the payload, "\n", payload bytes.

export const PROTOCOL_VERSION = "v1";
export const MAX_RECORD_BYTES = 64 * 1024 * 1024;

export function encodeRecord(obj: unknown): Buffer {
  const payload = Buffer.from(JSON.stringify(obj), "utf-8");
  return Buffer.concat([Buffer.from(`${payload.length}\n`, "ascii"), payload]);
}

/** Incremental frame parser; feed() returns every record completed so far. */
export class RecordParser {
  private buf: Buffer = Buffer.alloc(0);

  feed(chunk: Buffer): Record<string, unknown>[] {
    this.buf = this.buf.length === 0 ? chunk : Buffer.concat([this.buf, chunk]);
    const records: Record<string, unknown>[] = [];
    for (;;) {
      const nl = this.buf.indexOf(0x0a);
      if (nl < 0) {
        if (this.buf.length > 32) throw new Error("missing record length header");
        return records;
      }
      const header = this.buf.subarray(0, nl).toString("ascii");
      const length = Number(header);
      if (!Number.isInteger(length) || length < 0 || length > MAX_RECORD_BYTES) {
        throw new Error(`bad record length header ${JSON.stringify(header)}`);
      }
      if (this.buf.length < nl + 1 + length) return records;
      const payload = this.buf.subarray(nl + 1, nl + 1 + length).toString("utf-8");
      this.buf = this.buf.subarray(nl + 1 + length);
      const obj = JSON.parse(payload);
      if (obj === null || typeof obj !== "object" || Array.isArray(obj)) {
        throw new Error("record must be a JSON object");
      }
      records.push(obj as Record<string, unknown>);
    }
  }
}

export interface ScoreRequest {
  id: string;
  question: string;
  context_tokens: string[];
}

export interface ScoreResponse {
  id: string;
  p_ans: number;
  p_start: number[];
  p_end: number[];
  truncated?: boolean;
}

export function parseScoreRequest(record: Record<string, unknown>): ScoreRequest {
  const { id, question, context_tokens } = record as {
    id?: unknown;
    question?: unknown;
    context_tokens?: unknown;
  };
  if (typeof id !== "string") throw new Error("request id must be a string");
  if (typeof question !== "string") throw new Error("question must be a string");
  if (!Array.isArray(context_tokens) || context_tokens.length === 0) {
    throw new Error("context_tokens must be a non-empty array");
  }
  const tokens = context_tokens.map((t) => String(t));
  if (tokens[0] !== "null") throw new Error('context_tokens[0] must be the "null" sentinel');
  return { id, question, context_tokens: tokens };
}
