// TCP scorer service: answers wire-protocol score requests from a trained
// checkpoint.  One model instance; requests are scored through a serial
// queue (inference is synchronous CPU math), responses go out as they
// complete and carry the request id they answer.

import * as net from "net";

import { predict, QaModel } from "./model";
import {
  PROTOCOL_VERSION,
  RecordParser,
  ScoreResponse,
  encodeRecord,
  parseScoreRequest,
} from "./protocol";
import { SubwordTokenizer } from "./tokenizer";

export interface ServeOptions {
  host: string;
  port: number;
}

export class ScorerService {
  private readonly server: net.Server;
  private queue: Promise<void> = Promise.resolve();

  constructor(private readonly model: QaModel, private readonly tokenizer: SubwordTokenizer) {
    this.server = net.createServer((socket) => this.handleConnection(socket));
  }

  listen(options: ServeOptions): Promise<{ host: string; port: number }> {
    return new Promise((resolve, reject) => {
      this.server.once("error", reject);
      this.server.listen(options.port, options.host, () => {
        const addr = this.server.address() as net.AddressInfo;
        resolve({ host: addr.address, port: addr.port });
      });
    });
  }

  close(): Promise<void> {
    return new Promise((resolve) => this.server.close(() => resolve()));
  }

  private handleConnection(socket: net.Socket): void {
    const parser = new RecordParser();
    let shookHands = false;
    socket.on("error", () => socket.destroy());
    socket.on("data", (chunk: Buffer) => {
      let records: Record<string, unknown>[];
      try {
        records = parser.feed(chunk);
      } catch (err) {
        socket.write(encodeRecord({ id: "", error: `framing error: ${(err as Error).message}` }));
        socket.end();
        return;
      }
      for (const record of records) {
        if (!shookHands) {
          if (record.handshake === PROTOCOL_VERSION) {
            shookHands = true;
            socket.write(encodeRecord({ handshake: PROTOCOL_VERSION }));
          } else {
            socket.write(encodeRecord({ id: "", error: "protocol handshake failed" }));
            socket.end();
            return;
          }
          continue;
        }
        this.enqueue(socket, record);
      }
    });
  }

  private enqueue(socket: net.Socket, record: Record<string, unknown>): void {
    this.queue = this.queue.then(() => {
      const response = this.answer(record);
      if (!socket.destroyed) socket.write(encodeRecord(response));
    });
  }

  private answer(record: Record<string, unknown>): ScoreResponse | Record<string, unknown> {
    const rid = typeof record.id === "string" ? record.id : "";
    if (record.health) {
      return { id: rid, ok: true, model: "qa-service", version: PROTOCOL_VERSION };
    }
    try {
      const request = parseScoreRequest(record);
      const prediction = predict(
        this.model,
        this.tokenizer,
        request.question,
        request.context_tokens
      );
      const response: ScoreResponse = {
        id: request.id,
        p_ans: prediction.pAns,
        p_start: prediction.pStart,
        p_end: prediction.pEnd,
      };
      if (prediction.truncated) response.truncated = true;
      return response;
    } catch (err) {
      return { id: rid, error: (err as Error).message };
    }
  }
}
