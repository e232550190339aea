// Smoke fine-tune acceptance: training objective strictly decreases over
// the first three epochs on the 30-sample file, and after fine-tuning a
// training positive is judged answerable (p_ans > 0.5).

import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { describe, expect, it } from "vitest";

import { loadSamples } from "../src/format";
import { predict } from "../src/model";
import { finetune, loadCheckpoint, saveCheckpoint } from "../src/train";
import { thirtySamples, writeSamples } from "./fixture";

const QA30 = path.join(__dirname, "data", "qa30.jsonl");

describe("fine-tuning", () => {
  it("loss strictly decreases over the first 3 epochs and a positive clears 0.5", () => {
    const file = QA30;
    const lines: string[] = [];
    const result = finetune(
      file,
      { epochs: 24, learningRate: 0.03, seed: 1 },
      (l) => lines.push(l)
    );
    expect(result.history).toHaveLength(24);
    expect(result.history[0]).toBeGreaterThan(result.history[1]);
    expect(result.history[1]).toBeGreaterThan(result.history[2]);
    // the per-epoch objective is logged
    expect(lines.filter((l) => /^epoch \d+ loss /.test(l))).toHaveLength(24);

    const samples = loadSamples(file);
    const positives = samples.filter((s) => s.answerable);
    const pAns = positives.map(
      (s) => predict(result.model, result.tokenizer, s.question, s.contextTokens).pAns
    );
    expect(Math.max(...pAns)).toBeGreaterThan(0.5);

    // round-trip through a checkpoint preserves predictions
    const ckpt = path.join(fs.mkdtempSync(path.join(os.tmpdir(), "qa-ckpt-")), "model.ckpt.json");
    saveCheckpoint(ckpt, result.model, result.tokenizer);
    const restored = loadCheckpoint(ckpt);
    const again = predict(
      restored.model,
      restored.tokenizer,
      positives[0].question,
      positives[0].contextTokens
    );
    const direct = predict(
      result.model,
      result.tokenizer,
      positives[0].question,
      positives[0].contextTokens
    );
    expect(again.pAns).toBeCloseTo(direct.pAns, 6);
  }, 180_000);

  it("drives p_ans toward 0 on an all-unanswerable file", () => {
    const unanswerable = thirtySamples()
      .filter((s) => !s.answerable)
      .slice(0, 12);
    const file = writeSamples(unanswerable, "neg.jsonl");
    const result = finetune(file, { epochs: 6, learningRate: 0.03, seed: 2 }, () => {});
    const samples = loadSamples(file);
    const mean =
      samples
        .map((s) => predict(result.model, result.tokenizer, s.question, s.contextTokens).pAns)
        .reduce((a, b) => a + b, 0) / samples.length;
    expect(mean).toBeLessThan(0.2);
  }, 120_000);

  it("rejects an empty sample file", () => {
    const file = writeSamples([], "empty.jsonl");
    fs.writeFileSync(file, "");
    expect(() => finetune(file, { epochs: 1 }, () => {})).toThrow(/no samples/);
  });

  it("reports alignment failures with the record number", () => {
    const bad = thirtySamples().slice(0, 1);
    const file = writeSamples(bad, "tight.jsonl");
    // max length too small for the context
    expect(() => finetune(file, { epochs: 1, maxSeqLen: 8 }, () => {})).toThrow(/sample 1/);
  });
});
