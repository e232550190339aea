// Deterministic sub-word tokenizer: words split into fixed-width pieces,
// continuations marked with "##".  The vocabulary is collected from the
// training samples; unseen pieces map to [UNK].

export const PAD = 0;
export const UNK = 1;
export const CLS = 2;
export const SEP = 3;
const SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"];

const PIECE_WIDTH = 4;

export function wordToPieces(word: string): string[] {
  const w = word.toLowerCase();
  if (w.length === 0) return ["[UNK]"];
  const pieces: string[] = [];
  for (let i = 0; i < w.length; i += PIECE_WIDTH) {
    pieces.push((i === 0 ? "" : "##") + w.slice(i, i + PIECE_WIDTH));
  }
  return pieces;
}

export interface Encoding {
  ids: number[];
  // context word index each position belongs to, or -1 (CLS/question/SEP)
  contextWordOf: number[];
  // number of context words that survived (prefix of the context)
  wordsKept: number;
  truncated: boolean;
}

export class SubwordTokenizer {
  readonly pieceToId: Map<string, number>;

  constructor(pieces: Iterable<string>) {
    this.pieceToId = new Map(SPECIALS.map((p, i) => [p, i]));
    for (const piece of pieces) {
      if (!this.pieceToId.has(piece)) this.pieceToId.set(piece, this.pieceToId.size);
    }
  }

  static fromWordLists(wordLists: Iterable<string[]>): SubwordTokenizer {
    const pieces: string[] = [];
    for (const words of wordLists) {
      for (const word of words) pieces.push(...wordToPieces(word));
    }
    return new SubwordTokenizer(pieces);
  }

  get vocabSize(): number {
    return this.pieceToId.size;
  }

  pieceIds(word: string): number[] {
    return wordToPieces(word).map((p) => this.pieceToId.get(p) ?? UNK);
  }

  /**
   * [CLS] question-pieces [SEP] context-pieces, truncated from the right to
   * maxLen.  Context word 0 (the "null" sentinel) must always survive.
   */
  encode(questionWords: string[], contextWords: string[], maxLen: number): Encoding {
    const ids: number[] = [CLS];
    const contextWordOf: number[] = [-1];
    for (const word of questionWords) {
      for (const id of this.pieceIds(word)) {
        ids.push(id);
        contextWordOf.push(-1);
      }
    }
    ids.push(SEP);
    contextWordOf.push(-1);
    let wordsKept = 0;
    let truncated = false;
    for (let w = 0; w < contextWords.length; w++) {
      const pieceIds = this.pieceIds(contextWords[w]);
      if (ids.length + pieceIds.length > maxLen) {
        truncated = true;
        break;
      }
      for (const id of pieceIds) {
        ids.push(id);
        contextWordOf.push(w);
      }
      wordsKept += 1;
    }
    if (wordsKept < 1) {
      throw new Error(
        `context does not fit: question occupies ${ids.length} of ${maxLen} positions`
      );
    }
    return { ids, contextWordOf, wordsKept, truncated };
  }

  serialize(): [string, number][] {
    return Array.from(this.pieceToId.entries());
  }

  static deserialize(entries: [string, number][]): SubwordTokenizer {
    const tok = new SubwordTokenizer([]);
    tok.pieceToId.clear();
    for (const [piece, id] of entries) tok.pieceToId.set(piece, id);
    return tok;
  }
}

export function splitQuestion(question: string): string[] {
  return question.split(/\s+/).filter((w) => w.length > 0);
}
