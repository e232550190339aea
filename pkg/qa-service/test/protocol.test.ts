import { describe, expect, it } from "vitest";

import { RecordParser, encodeRecord, parseScoreRequest } from "../src/protocol";

describe("record framing", () => {
  it("round-trips records", () => {
    const parser = new RecordParser();
    const records = parser.feed(encodeRecord({ id: "1", question: "q", context_tokens: ["null", "á"] }));
    expect(records).toEqual([{ id: "1", question: "q", context_tokens: ["null", "á"] }]);
  });

  it("reassembles records split across chunks", () => {
    const parser = new RecordParser();
    const frame = encodeRecord({ id: "x", p_ans: 0.5 });
    const records: unknown[] = [];
    for (let i = 0; i < frame.length; i++) {
      records.push(...parser.feed(frame.subarray(i, i + 1)));
    }
    expect(records).toEqual([{ id: "x", p_ans: 0.5 }]);
  });

  it("parses several records from one chunk", () => {
    const parser = new RecordParser();
    const chunk = Buffer.concat([encodeRecord({ a: 1 }), encodeRecord({ b: 2 })]);
    expect(parser.feed(chunk)).toEqual([{ a: 1 }, { b: 2 }]);
  });

  it("rejects a garbage length header", () => {
    const parser = new RecordParser();
    expect(() => parser.feed(Buffer.from("xyz\n{}"))).toThrow(/length header/);
  });

  it("rejects non-object payloads", () => {
    const parser = new RecordParser();
    expect(() => parser.feed(encodeRecord([1, 2] as unknown as object))).toThrow(/object/);
  });
});

describe("score request validation", () => {
  it("accepts a well-formed request", () => {
    const req = parseScoreRequest({ id: "7", question: "h | r", context_tokens: ["null", "a"] });
    expect(req.context_tokens).toEqual(["null", "a"]);
  });

  it("requires the null sentinel", () => {
    expect(() =>
      parseScoreRequest({ id: "7", question: "q", context_tokens: ["a", "b"] })
    ).toThrow(/null/);
  });

  it("requires a string id", () => {
    expect(() => parseScoreRequest({ question: "q", context_tokens: ["null"] })).toThrow(/id/);
  });
});
