// QA sample file: one JSON object per line, the format gen-qa emits.
// {"question", "context_tokens", "answer_start", "answer_end", "answerable"}

import * as fs from "fs";

export interface QaSample {
  question: string;
  contextTokens: string[];
  answerStart: number;
  answerEnd: number;
  answerable: boolean;
}

export function parseSampleLine(line: string, lineNo: number): QaSample {
  let obj: any;
  try {
    obj = JSON.parse(line);
  } catch (err) {
    throw new Error(`line ${lineNo}: invalid JSON (${(err as Error).message})`);
  }
  for (const key of ["question", "context_tokens", "answer_start", "answer_end", "answerable"]) {
    if (!(key in obj)) throw new Error(`line ${lineNo}: missing field "${key}"`);
  }
  const sample: QaSample = {
    question: String(obj.question),
    contextTokens: (obj.context_tokens as unknown[]).map((t) => String(t)),
    answerStart: Number(obj.answer_start),
    answerEnd: Number(obj.answer_end),
    answerable: Boolean(obj.answerable),
  };
  const n = sample.contextTokens.length;
  if (n === 0 || sample.contextTokens[0] !== "null") {
    throw new Error(`line ${lineNo}: context must start with the "null" sentinel`);
  }
  if (!(sample.answerStart >= 0 && sample.answerStart < sample.answerEnd && sample.answerEnd <= n)) {
    throw new Error(`line ${lineNo}: bad answer span [${sample.answerStart}, ${sample.answerEnd})`);
  }
  const isNullSpan = sample.answerStart === 0 && sample.answerEnd === 1;
  if (sample.answerable === isNullSpan) {
    throw new Error(`line ${lineNo}: answerable flag inconsistent with answer span`);
  }
  return sample;
}

export function loadSamples(path: string): QaSample[] {
  const text = fs.readFileSync(path, "utf-8");
  const samples: QaSample[] = [];
  let lineNo = 0;
  for (const raw of text.split("\n")) {
    lineNo += 1;
    const line = raw.trim();
    if (line) samples.push(parseSampleLine(line, lineNo));
  }
  if (samples.length === 0) throw new Error(`${path}: no samples`);
  return samples;
}
