#!/usr/bin/env node
// qa-service CLI: finetune a checkpoint from a QA sample file, or serve one.

import { finetune, saveCheckpoint, loadCheckpoint, DEFAULT_TRAIN } from "./train";
import { ScorerService } from "./serve";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) fail(`unexpected argument ${arg}`);
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) fail(`flag ${arg} needs a value`);
    flags.set(arg.slice(2), value);
    i++;
  }
  return flags;
}

function fail(message: string): never {
  console.error(`error: ${message}`);
  console.error(usage());
  process.exit(2);
}

function usage(): string {
  return [
    "usage:",
    "  qa-service finetune --samples qa.jsonl --out model.ckpt.json",
    "      [--epochs N] [--lr R] [--batch-size N] [--max-seq-len N] [--seed N] [--base ckpt]",
    "  qa-service serve --checkpoint model.ckpt.json [--host 127.0.0.1] [--port 7331]",
  ].join("\n");
}

function num(flags: Map<string, string>, name: string, fallback: number): number {
  const raw = flags.get(name);
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isFinite(value)) fail(`--${name} must be a number, got ${raw}`);
  return value;
}

async function main(): Promise<void> {
  const [command, ...rest] = process.argv.slice(2);
  if (command === "finetune") {
    const flags = parseFlags(rest);
    const samples = flags.get("samples") ?? fail("--samples is required");
    const out = flags.get("out") ?? fail("--out is required");
    const result = finetune(samples, {
      epochs: num(flags, "epochs", DEFAULT_TRAIN.epochs),
      learningRate: num(flags, "lr", DEFAULT_TRAIN.learningRate),
      batchSize: num(flags, "batch-size", DEFAULT_TRAIN.batchSize),
      maxSeqLen: num(flags, "max-seq-len", DEFAULT_TRAIN.maxSeqLen),
      seed: num(flags, "seed", DEFAULT_TRAIN.seed),
      basePath: flags.get("base"),
    });
    saveCheckpoint(out, result.model, result.tokenizer);
    console.error(`saved checkpoint to ${out}`);
  } else if (command === "serve") {
    const flags = parseFlags(rest);
    const checkpointPath = flags.get("checkpoint") ?? fail("--checkpoint is required");
    const { model, tokenizer } = loadCheckpoint(checkpointPath);
    const service = new ScorerService(model, tokenizer);
    const { host, port } = await service.listen({
      host: flags.get("host") ?? "127.0.0.1",
      port: num(flags, "port", 7331),
    });
    // the parent process scrapes this line to learn the bound port
    console.log(`listening on ${host}:${port}`);
  } else {
    fail(`unknown command ${command ?? "(none)"}`);
  }
}

main().catch((err) => {
  console.error(`error: ${(err as Error).message}`);
  process.exit(1);
});
