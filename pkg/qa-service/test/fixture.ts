// Deterministic 30-sample training file in the qaval QA sample format:
// 10 bags, one answerable sample each plus two unanswerable ones.

import * as fs from "fs";
import * as os from "os";
import * as path from "path";

const FILLERS = ["the", "report", "said", "that", "about", "its", "plans", "for"];
const RELATIONS = ["rel_1", "rel_2", "rel_3", "rel_4", "rel_5"];

export interface FixtureSample {
  question: string;
  context_tokens: string[];
  answer_start: number;
  answer_end: number;
  answerable: boolean;
}

export function thirtySamples(): FixtureSample[] {
  const samples: FixtureSample[] = [];
  for (let i = 0; i < 10; i++) {
    const head = `head_${i}`;
    const tailWords = ["tail", `entity_${i}`];
    const lead = [FILLERS[i % FILLERS.length], FILLERS[(i + 3) % FILLERS.length]];
    const mid = [FILLERS[(i + 5) % FILLERS.length]];
    const context = ["null", ...lead, head, ...mid, ...tailWords, FILLERS[(i + 1) % FILLERS.length]];
    const answerStart = 1 + lead.length + 1 + mid.length;
    const gold = RELATIONS[i % RELATIONS.length];
    samples.push({
      question: `${head} | ${gold}`,
      context_tokens: context,
      answer_start: answerStart,
      answer_end: answerStart + tailWords.length,
      answerable: true,
    });
    for (const wrong of [RELATIONS[(i + 1) % RELATIONS.length], RELATIONS[(i + 2) % RELATIONS.length]]) {
      samples.push({
        question: `${head} | ${wrong}`,
        context_tokens: context,
        answer_start: 0,
        answer_end: 1,
        answerable: false,
      });
    }
  }
  return samples;
}

export function writeSamples(samples: FixtureSample[], name: string): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "qa-service-test-"));
  const file = path.join(dir, name);
  fs.writeFileSync(file, samples.map((s) => JSON.stringify(s)).join("\n") + "\n");
  return file;
}
