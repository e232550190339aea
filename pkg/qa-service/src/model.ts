// Compact transformer QA scorer: token + position embeddings, a few
// pre-norm self-attention blocks, and three heads (answer start, answer
// end, answerable).  Implemented directly on tf variables so checkpoints
// serialize to plain JSON and training stays deterministic under a seed.

import * as tf from "@tensorflow/tfjs";

import { QaSample } from "./format";
import { SubwordTokenizer, splitQuestion } from "./tokenizer";

export interface ModelConfig {
  dModel: number;
  nHeads: number;
  nBlocks: number;
  ffDim: number;
  maxSeqLen: number;
  vocabSize: number;
}

export const DEFAULT_ARCH = { dModel: 32, nHeads: 2, nBlocks: 2, ffDim: 64 };

export class QaModel {
  private static instanceCount = 0;

  readonly config: ModelConfig;
  readonly vars = new Map<string, tf.Variable>();

  constructor(config: ModelConfig, seed = 0) {
    this.config = config;
    const { dModel, ffDim, maxSeqLen, vocabSize, nBlocks } = config;
    let s = seed;
    // tf variable names are process-global; prefix them per instance while
    // keeping logical names as map keys so checkpoints stay portable
    const prefix = `qam${QaModel.instanceCount++}/`;
    const normal = (shape: number[], std: number) =>
      tf.randomNormal(shape, 0, std, "float32", 1000 + s++);
    const add = (name: string, init: tf.Tensor) => {
      this.vars.set(name, tf.variable(init, true, prefix + name));
    };
    add("tok_emb", normal([vocabSize, dModel], 0.05));
    add("pos_emb", normal([maxSeqLen, dModel], 0.05));
    const attnStd = 1 / Math.sqrt(dModel);
    for (let b = 0; b < nBlocks; b++) {
      for (const proj of ["q", "k", "v", "o"]) {
        add(`b${b}_W${proj}`, normal([dModel, dModel], attnStd));
        add(`b${b}_b${proj}`, tf.zeros([dModel]));
      }
      add(`b${b}_ln1_g`, tf.ones([dModel]));
      add(`b${b}_ln1_b`, tf.zeros([dModel]));
      add(`b${b}_ff_W1`, normal([dModel, ffDim], attnStd));
      add(`b${b}_ff_b1`, tf.zeros([ffDim]));
      add(`b${b}_ff_W2`, normal([ffDim, dModel], 1 / Math.sqrt(ffDim)));
      add(`b${b}_ff_b2`, tf.zeros([dModel]));
      add(`b${b}_ln2_g`, tf.ones([dModel]));
      add(`b${b}_ln2_b`, tf.zeros([dModel]));
    }
    add("ln_f_g", tf.ones([dModel]));
    add("ln_f_b", tf.zeros([dModel]));
    for (const head of ["start", "end", "ans"]) {
      add(`${head}_W`, normal([dModel, 1], attnStd));
      add(`${head}_b`, tf.zeros([1]));
    }
  }

  private v(name: string): tf.Variable {
    const variable = this.vars.get(name);
    if (!variable) throw new Error(`unknown variable ${name}`);
    return variable;
  }

  private layerNorm(x: tf.Tensor, gamma: tf.Tensor, beta: tf.Tensor): tf.Tensor {
    const { mean, variance } = tf.moments(x, -1, true);
    return x.sub(mean).div(variance.add(1e-5).sqrt()).mul(gamma).add(beta);
  }

  /**
   * ids [B, L] int32; attnMask [B, L] 1 for real positions.
   * Returns start/end logits [B, L] and answerable logits [B].
   */
  forward(ids: tf.Tensor2D, attnMask: tf.Tensor2D): {
    startLogits: tf.Tensor2D;
    endLogits: tf.Tensor2D;
    ansLogits: tf.Tensor1D;
  } {
    const { dModel, nHeads, nBlocks } = this.config;
    const dHead = dModel / nHeads;
    const [batch, seqLen] = ids.shape;
    // tfjs cannot differentiate broadcast [B,L,d]x[d,k] matmuls, so every
    // projection runs on a [B*L, d] view
    const proj2d = (t: tf.Tensor, w: tf.Tensor, b: tf.Tensor) =>
      t.reshape([batch * seqLen, t.shape[t.shape.length - 1]!]).matMul(w).add(b);
    let x = tf
      .gather(this.v("tok_emb"), ids.flatten())
      .reshape([batch, seqLen, dModel])
      .add(this.v("pos_emb").slice([0, 0], [seqLen, dModel]));
    const maskAdd = attnMask.reshape([batch, 1, 1, seqLen]).sub(1).mul(1e9);
    const keep = attnMask.expandDims(-1); // zero out padded positions
    for (let b = 0; b < nBlocks; b++) {
      const h = this.layerNorm(x, this.v(`b${b}_ln1_g`), this.v(`b${b}_ln1_b`));
      const split = (proj: string) =>
        proj2d(h, this.v(`b${b}_W${proj}`), this.v(`b${b}_b${proj}`))
          .reshape([batch, seqLen, nHeads, dHead])
          .transpose([0, 2, 1, 3]);
      const scores = tf
        .matMul(split("q"), split("k"), false, true)
        .div(Math.sqrt(dHead))
        .add(maskAdd);
      const merged = tf
        .matMul(tf.softmax(scores), split("v"))
        .transpose([0, 2, 1, 3])
        .reshape([batch, seqLen, dModel]);
      const attended = proj2d(merged, this.v(`b${b}_Wo`), this.v(`b${b}_bo`)).reshape([
        batch,
        seqLen,
        dModel,
      ]);
      x = x.add(attended.mul(keep));
      const h2 = this.layerNorm(x, this.v(`b${b}_ln2_g`), this.v(`b${b}_ln2_b`));
      const ff = proj2d(
        proj2d(h2, this.v(`b${b}_ff_W1`), this.v(`b${b}_ff_b1`)).relu().reshape([batch, seqLen, this.config.ffDim]),
        this.v(`b${b}_ff_W2`),
        this.v(`b${b}_ff_b2`)
      ).reshape([batch, seqLen, dModel]);
      x = x.add(ff.mul(keep));
    }
    x = this.layerNorm(x, this.v("ln_f_g"), this.v("ln_f_b"));
    const headLogits = (name: string) =>
      proj2d(x, this.v(`${name}_W`), this.v(`${name}_b`)).reshape([batch, seqLen]) as tf.Tensor2D;
    const startLogits = headLogits("start");
    const endLogits = headLogits("end");
    // answerable head reads the [CLS] position (index 0)
    const pooled = x.slice([0, 0, 0], [batch, 1, dModel]).reshape([batch, dModel]);
    const ansLogits = pooled
      .matMul(this.v("ans_W"))
      .add(this.v("ans_b"))
      .squeeze([1]) as tf.Tensor1D;
    return { startLogits, endLogits, ansLogits };
  }

  trainableVariables(): tf.Variable[] {
    return Array.from(this.vars.values());
  }

  serializeWeights(): Record<string, { shape: number[]; data: number[] }> {
    const out: Record<string, { shape: number[]; data: number[] }> = {};
    for (const [name, variable] of this.vars.entries()) {
      out[name] = { shape: variable.shape.slice(), data: Array.from(variable.dataSync()) };
    }
    return out;
  }

  loadWeights(weights: Record<string, { shape: number[]; data: number[] }>): void {
    for (const [name, variable] of this.vars.entries()) {
      const saved = weights[name];
      if (!saved) throw new Error(`checkpoint missing weight ${name}`);
      variable.assign(tf.tensor(saved.data, saved.shape as number[], "float32"));
    }
  }
}

export interface EncodedSample {
  ids: number[];
  contextWordOf: number[];
  goldStartPos: number; // sub-word index of the answer's first piece
  goldEndPos: number; // sub-word index of the answer's last piece
  answerable: boolean;
}

export function wordPieceSpans(contextWordOf: number[]): Map<number, [number, number]> {
  // word index -> [first piece position, last piece position]
  const spans = new Map<number, [number, number]>();
  contextWordOf.forEach((w, pos) => {
    if (w < 0) return;
    const span = spans.get(w);
    if (!span) spans.set(w, [pos, pos]);
    else span[1] = pos;
  });
  return spans;
}

export function encodeSample(
  tokenizer: SubwordTokenizer,
  sample: QaSample,
  maxSeqLen: number
): EncodedSample {
  const enc = tokenizer.encode(splitQuestion(sample.question), sample.contextTokens, maxSeqLen);
  const spans = wordPieceSpans(enc.contextWordOf);
  const startWord = sample.answerStart;
  const endWord = sample.answerEnd - 1;
  const startSpan = spans.get(startWord);
  const endSpan = spans.get(endWord);
  if (!startSpan || !endSpan) {
    throw new Error(
      `answer words [${startWord}, ${endWord}] truncated away (kept ${enc.wordsKept} words)`
    );
  }
  return {
    ids: enc.ids,
    contextWordOf: enc.contextWordOf,
    goldStartPos: startSpan[0],
    goldEndPos: endSpan[1],
    answerable: sample.answerable,
  };
}

export interface BatchTensors {
  ids: tf.Tensor2D;
  attnMask: tf.Tensor2D;
  spanMask: tf.Tensor2D;
  goldStart: tf.Tensor1D;
  goldEnd: tf.Tensor1D;
  answerable: tf.Tensor1D;
}

export function batchTensors(samples: EncodedSample[]): BatchTensors {
  const maxLen = Math.max(...samples.map((s) => s.ids.length));
  const b = samples.length;
  const ids: number[][] = [];
  const attn: number[][] = [];
  const span: number[][] = [];
  for (const s of samples) {
    const pad = maxLen - s.ids.length;
    ids.push([...s.ids, ...new Array(pad).fill(0)]);
    attn.push([...s.ids.map(() => 1), ...new Array(pad).fill(0)]);
    span.push([...s.contextWordOf.map((w) => (w >= 0 ? 1 : 0)), ...new Array(pad).fill(0)]);
  }
  return {
    ids: tf.tensor2d(ids, [b, maxLen], "int32"),
    attnMask: tf.tensor2d(attn, [b, maxLen], "float32"),
    spanMask: tf.tensor2d(span, [b, maxLen], "float32"),
    goldStart: tf.tensor1d(samples.map((s) => s.goldStartPos), "int32"),
    goldEnd: tf.tensor1d(samples.map((s) => s.goldEndPos), "int32"),
    answerable: tf.tensor1d(samples.map((s) => (s.answerable ? 1 : 0)), "float32"),
  };
}

function maskedLogSoftmax(logits: tf.Tensor2D, spanMask: tf.Tensor2D): tf.Tensor2D {
  return tf.logSoftmax(logits.add(spanMask.sub(1).mul(1e9))) as tf.Tensor2D;
}

function gatherAt(logProbs: tf.Tensor2D, positions: tf.Tensor1D): tf.Tensor1D {
  const oneHot = tf.oneHot(positions, logProbs.shape[1]).toFloat();
  return logProbs.mul(oneHot).sum(1) as tf.Tensor1D;
}

/**
 * Per-sample losses on a batch: position loss is the negative
 * log-likelihood of the gold start and end sub-word positions (the "null"
 * piece for unanswerable samples); answerable loss is binary cross-entropy
 * on the answerable flag.  Returns the two [B] vectors.
 */
export function batchLosses(model: QaModel, batch: BatchTensors): {
  positionLoss: tf.Tensor1D;
  ansLoss: tf.Tensor1D;
} {
  const { startLogits, endLogits, ansLogits } = model.forward(batch.ids, batch.attnMask);
  const logStart = maskedLogSoftmax(startLogits, batch.spanMask);
  const logEnd = maskedLogSoftmax(endLogits, batch.spanMask);
  const positionLoss = gatherAt(logStart, batch.goldStart)
    .add(gatherAt(logEnd, batch.goldEnd))
    .neg() as tf.Tensor1D;
  // stable sigmoid cross-entropy: max(z,0) - z*f + log(1 + exp(-|z|))
  const z = ansLogits;
  const f = batch.answerable;
  const ansLoss = z
    .relu()
    .sub(z.mul(f))
    .add(z.abs().neg().exp().log1p()) as tf.Tensor1D;
  return { positionLoss, ansLoss };
}

/** Exact dataset objective: (1 / 2N) * sum of (position + answerable) losses. */
export function datasetLoss(model: QaModel, samples: EncodedSample[], batchSize = 32): number {
  let total = 0;
  for (let i = 0; i < samples.length; i += batchSize) {
    const chunk = samples.slice(i, i + batchSize);
    total += tf.tidy(() => {
      const { positionLoss, ansLoss } = batchLosses(model, batchTensors(chunk));
      return positionLoss.add(ansLoss).sum().dataSync()[0];
    });
  }
  return total / (2 * samples.length);
}

export interface Prediction {
  pAns: number;
  pStart: number[];
  pEnd: number[];
  truncated: boolean;
}

/**
 * Score one (question, context) pair, collapsing sub-word distributions to
 * word level: a word's probability is the sum over its pieces' softmax
 * mass; words cut by the sequence limit get 0; the vectors are then
 * renormalized in double precision and cover every context word, with the
 * "null" sentinel at index 0.
 */
export function predict(
  model: QaModel,
  tokenizer: SubwordTokenizer,
  question: string,
  contextTokens: string[]
): Prediction {
  const enc = tokenizer.encode(splitQuestion(question), contextTokens, model.config.maxSeqLen);
  const [pAns, pStartSub, pEndSub] = tf.tidy(() => {
    const ids = tf.tensor2d([enc.ids], [1, enc.ids.length], "int32");
    const attnMask = tf.ones([1, enc.ids.length]) as tf.Tensor2D;
    const spanMask = tf.tensor2d(
      [enc.contextWordOf.map((w) => (w >= 0 ? 1 : 0))],
      [1, enc.ids.length],
      "float32"
    );
    const { startLogits, endLogits, ansLogits } = model.forward(ids, attnMask);
    const pStart = tf.softmax(startLogits.add(spanMask.sub(1).mul(1e9)));
    const pEnd = tf.softmax(endLogits.add(spanMask.sub(1).mul(1e9)));
    return [
      tf.sigmoid(ansLogits).dataSync()[0],
      Array.from(pStart.dataSync()),
      Array.from(pEnd.dataSync()),
    ] as [number, number[], number[]];
  });
  const collapse = (sub: number[]): number[] => {
    const perWord = new Array(contextTokens.length).fill(0);
    enc.contextWordOf.forEach((w, pos) => {
      if (w >= 0) perWord[w] += sub[pos];
    });
    const total = perWord.reduce((a, b) => a + b, 0);
    if (total <= 0) throw new Error("degenerate span distribution");
    return perWord.map((v) => v / total);
  };
  const clamp01 = (v: number) => Math.min(1, Math.max(0, v));
  return {
    pAns: clamp01(pAns),
    pStart: collapse(pStartSub),
    pEnd: collapse(pEndSub),
    truncated: enc.truncated,
  };
}
