import { describe, expect, it } from "vitest";

import { parseSampleLine } from "../src/format";

const good = JSON.stringify({
  question: "head_0 | rel_1",
  context_tokens: ["null", "a", "tail"],
  answer_start: 2,
  answer_end: 3,
  answerable: true,
});

describe("sample parsing", () => {
  it("parses a well-formed line", () => {
    const sample = parseSampleLine(good, 1);
    expect(sample.contextTokens).toHaveLength(3);
    expect(sample.answerable).toBe(true);
  });

  it("rejects a missing field with the line number", () => {
    const obj = JSON.parse(good);
    delete obj.answer_end;
    expect(() => parseSampleLine(JSON.stringify(obj), 4)).toThrow(/line 4.*answer_end/);
  });

  it("rejects an answerable flag pointing at the sentinel", () => {
    const obj = JSON.parse(good);
    obj.answer_start = 0;
    obj.answer_end = 1;
    expect(() => parseSampleLine(JSON.stringify(obj), 2)).toThrow(/inconsistent/);
  });

  it("rejects a context without the sentinel", () => {
    const obj = JSON.parse(good);
    obj.context_tokens = ["a", "b", "c"];
    expect(() => parseSampleLine(JSON.stringify(obj), 3)).toThrow(/null/);
  });

  it("rejects an out-of-range span", () => {
    const obj = JSON.parse(good);
    obj.answer_end = 9;
    expect(() => parseSampleLine(JSON.stringify(obj), 5)).toThrow(/span/);
  });
});
