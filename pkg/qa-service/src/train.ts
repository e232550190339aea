// Fine-tuning: minimize the dataset objective on a QA sample file with
// Adam, logging the exact objective once per epoch.  Checkpoints are plain
// JSON (config + vocabulary + weights), so no filesystem handlers beyond
// fs are needed.

import * as fs from "fs";

import * as tf from "@tensorflow/tfjs";

import { loadSamples } from "./format";
import {
  BatchTensors,
  DEFAULT_ARCH,
  EncodedSample,
  ModelConfig,
  QaModel,
  batchLosses,
  batchTensors,
  datasetLoss,
  encodeSample,
} from "./model";
import { SubwordTokenizer, splitQuestion } from "./tokenizer";

export interface TrainOptions {
  batchSize: number;
  learningRate: number;
  maxSeqLen: number;
  epochs: number;
  seed: number;
  basePath?: string;
}

// Reference fine-tuning settings; epochs and seed are deployment choices.
export const DEFAULT_TRAIN: TrainOptions = {
  batchSize: 16,
  learningRate: 1.5e-5,
  maxSeqLen: 384,
  epochs: 3,
  seed: 0,
};

export interface Checkpoint {
  config: ModelConfig;
  vocab: [string, number][];
  weights: Record<string, { shape: number[]; data: number[] }>;
}

export function saveCheckpoint(path: string, model: QaModel, tokenizer: SubwordTokenizer): void {
  const checkpoint: Checkpoint = {
    config: model.config,
    vocab: tokenizer.serialize(),
    weights: model.serializeWeights(),
  };
  fs.writeFileSync(path, JSON.stringify(checkpoint));
}

export function loadCheckpoint(path: string): { model: QaModel; tokenizer: SubwordTokenizer } {
  const checkpoint: Checkpoint = JSON.parse(fs.readFileSync(path, "utf-8"));
  const model = new QaModel(checkpoint.config);
  model.loadWeights(checkpoint.weights);
  return { model, tokenizer: SubwordTokenizer.deserialize(checkpoint.vocab) };
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function shuffled<T>(items: T[], rand: () => number): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

export interface TrainResult {
  model: QaModel;
  tokenizer: SubwordTokenizer;
  history: number[]; // exact dataset objective after each epoch
}

export function finetune(
  samplesPath: string,
  options: Partial<TrainOptions> = {},
  log: (line: string) => void = console.error
): TrainResult {
  const opts: TrainOptions = { ...DEFAULT_TRAIN, ...options };
  const samples = loadSamples(samplesPath);

  let model: QaModel;
  let tokenizer: SubwordTokenizer;
  if (opts.basePath) {
    ({ model, tokenizer } = loadCheckpoint(opts.basePath));
    if (model.config.maxSeqLen !== opts.maxSeqLen) {
      log(`using base checkpoint max sequence length ${model.config.maxSeqLen}`);
      opts.maxSeqLen = model.config.maxSeqLen;
    }
  } else {
    tokenizer = SubwordTokenizer.fromWordLists(
      samples.flatMap((s) => [splitQuestion(s.question), s.contextTokens])
    );
    model = new QaModel(
      { ...DEFAULT_ARCH, maxSeqLen: opts.maxSeqLen, vocabSize: tokenizer.vocabSize },
      opts.seed
    );
  }

  const encoded: EncodedSample[] = samples.map((sample, i) => {
    try {
      return encodeSample(tokenizer, sample, opts.maxSeqLen);
    } catch (err) {
      throw new Error(`sample ${i + 1}: ${(err as Error).message}`);
    }
  });

  const optimizer = tf.train.adam(opts.learningRate);
  const rand = mulberry32(opts.seed + 1);
  const variables = model.trainableVariables();
  const history: number[] = [];
  log(`training on ${encoded.length} samples, initial loss ${datasetLoss(model, encoded).toFixed(6)}`);
  for (let epoch = 1; epoch <= opts.epochs; epoch++) {
    const order = shuffled(encoded, rand);
    for (let i = 0; i < order.length; i += opts.batchSize) {
      const chunk = order.slice(i, i + opts.batchSize);
      const batch: BatchTensors = batchTensors(chunk);
      optimizer.minimize(
        () =>
          tf.tidy(() => {
            const { positionLoss, ansLoss } = batchLosses(model, batch);
            return positionLoss.add(ansLoss).mean().div(2) as tf.Scalar;
          }),
        false,
        variables
      );
      tf.dispose(batch as unknown as Record<string, tf.Tensor>);
    }
    const loss = datasetLoss(model, encoded);
    history.push(loss);
    log(`epoch ${epoch} loss ${loss.toFixed(6)}`);
  }
  optimizer.dispose();
  return { model, tokenizer, history };
}
