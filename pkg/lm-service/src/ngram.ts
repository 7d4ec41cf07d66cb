import { MASK } from "./protocol.js";

/**
 * Bundled training corpus: token streams from small Java-style units,
 * one statement or member per line, tokens separated by single spaces.
 * The model only ever sees token adjacency, so coverage of common
 * guard/return/declaration shapes matters more than volume.
 */
export const CORPUS: string[] = [
  "class Account { private int balance ; }",
  "class Window { private int width ; private int height ; }",
  "public int size ( ) { return this . count ; }",
  "public boolean isEmpty ( ) { return this . count == 0 ; }",
  "static int clamp ( int value , int limit ) { if ( value > limit ) { return limit ; } return value ; }",
  "static boolean accept ( int n ) { if ( n < 0 ) { return false ; } return true ; }",
  "static boolean reject ( int n ) { if ( n <= 0 ) { return true ; } return false ; }",
  "static boolean check ( int x ) { if ( x >= 1 ) { return true ; } return false ; }",
  "static boolean equals ( int a , int b ) { return a == b ; }",
  "static boolean differs ( int a , int b ) { return a != b ; }",
  "int total = base + offset ;",
  "int delta = end - start ;",
  "int area = width * height ;",
  "int half = size / 2 ;",
  "int rem = size % 2 ;",
  "index = index + 1 ;",
  "count = count - 1 ;",
  "if ( index < length ) { sum = sum + values [ index ] ; }",
  "if ( count > 0 ) { count = count - 1 ; }",
  "if ( size != 0 ) { return total / size ; }",
  "if ( a < b ) { return a ; } else { return b ; }",
  "while ( i < limit ) { i = i + 1 ; }",
  "for ( int i = 0 ; i < limit ; i = i + 1 ) { sum = sum + i ; }",
  "return this . value ;",
  "return buffer . length ;",
  "return items . size ( ) ;",
  "this . name = name ;",
  "this . limit = limit ;",
  "String label = node . label ;",
  "int depth = tree . depth ;",
  "if ( handler == null ) { return ; }",
  "if ( node != null ) { visit ( node ) ; }",
];

export interface NgramModel {
  /** follower counts: token or shape class -> (next token -> count) */
  next: Map<string, Map<string, number>>;
  /** predecessor counts: token or shape class -> (previous token -> count) */
  prev: Map<string, Map<string, number>>;
  unigram: Map<string, number>;
}

const NUM_CLASS = "§num§";
const WORD_CLASS = "§word§";

/**
 * Shape class for context backoff: any project's identifiers and
 * literals are unknown to the bundled corpus, but an unseen number
 * behaves like the numbers we did see, and an unseen word like the
 * words. Returns null for punctuation and operators, which are a
 * closed set the raw tables already cover.
 */
export function shapeClass(token: string): string | null {
  if (/^-?[0-9][0-9_]*$/.test(token)) return NUM_CLASS;
  if (/^[A-Za-z_$][A-Za-z0-9_$]*$/.test(token)) return WORD_CLASS;
  return null;
}

function bump(table: Map<string, Map<string, number>>, key: string, tok: string): void {
  let inner = table.get(key);
  if (inner === undefined) {
    inner = new Map();
    table.set(key, inner);
  }
  inner.set(tok, (inner.get(tok) ?? 0) + 1);
}

export function buildModel(corpus: string[] = CORPUS): NgramModel {
  const model: NgramModel = { next: new Map(), prev: new Map(), unigram: new Map() };
  for (const line of corpus) {
    const tokens = line.split(" ");
    for (let i = 0; i < tokens.length; i++) {
      model.unigram.set(tokens[i], (model.unigram.get(tokens[i]) ?? 0) + 1);
      if (i + 1 < tokens.length) {
        const a = tokens[i];
        const b = tokens[i + 1];
        bump(model.next, a, b);
        bump(model.prev, b, a);
        const ca = shapeClass(a);
        if (ca !== null) bump(model.next, ca, b);
        const cb = shapeClass(b);
        if (cb !== null) bump(model.prev, cb, a);
      }
    }
  }
  return model;
}

/** Exact context first; shape class only when the token is unseen. */
function contextCounts(
  table: Map<string, Map<string, number>>,
  token: string | undefined,
): Map<string, number> | undefined {
  if (token === undefined) return undefined;
  const exact = table.get(token);
  if (exact !== undefined) return exact;
  const cls = shapeClass(token);
  return cls !== null ? table.get(cls) : undefined;
}

/**
 * Contiguous slice of at most maxLen tokens that always contains the
 * center: start = clamp(center - floor(maxLen / 2), 0, len - width)
 * with width = min(len, maxLen), so the window hugs the sequence edges
 * instead of shrinking.
 */
export function windowAroundMask(tokens: string[], center: number, maxLen: number): string[] {
  const width = Math.min(tokens.length, maxLen);
  let start = center - Math.floor(maxLen / 2);
  start = Math.max(0, Math.min(start, tokens.length - width));
  return tokens.slice(start, start + width);
}

interface Scored {
  token: string;
  weight: number;
}

const SMOOTH = 0.1;
const W_UNIGRAM = 0.001;

/**
 * Rank fill-ins for the mask slot by bigram evidence from both sides.
 * The two neighbors are independent witnesses, so their counts multiply
 * (smoothed so a one-sided context still ranks): a candidate attested
 * by both beats one merely frequent after the left token. A small
 * unigram term breaks ties and keeps unseen contexts from going silent.
 * Scores are normalized so the best candidate gets 1.0 and everything
 * stays in (0, 1]. Ties break lexicographically to keep the output
 * deterministic.
 */
export function predictMasked(
  model: NgramModel,
  tokens: string[],
  maskIndex: number,
  k: number,
): { token: string; score: number }[] {
  const left = maskIndex > 0 ? tokens[maskIndex - 1] : undefined;
  const right = maskIndex + 1 < tokens.length ? tokens[maskIndex + 1] : undefined;
  const followers = contextCounts(model.next, left);
  const preceders = contextCounts(model.prev, right);

  const pool = new Set<string>();
  if (followers) for (const t of followers.keys()) pool.add(t);
  if (preceders) for (const t of preceders.keys()) pool.add(t);
  pool.delete(MASK);
  if (pool.size === 0) {
    for (const t of model.unigram.keys()) pool.add(t);
    pool.delete(MASK);
  }

  const scored: Scored[] = [];
  for (const token of pool) {
    const nextCount = followers?.get(token) ?? 0;
    const prevCount = preceders?.get(token) ?? 0;
    const weight =
      (nextCount + SMOOTH) * (prevCount + SMOOTH) +
      W_UNIGRAM * (model.unigram.get(token) ?? 0);
    if (weight > 0) scored.push({ token, weight });
  }
  scored.sort((a, b) => b.weight - a.weight || (a.token < b.token ? -1 : 1));

  const top = scored.slice(0, k);
  if (top.length === 0) return [];
  const best = top[0].weight;
  return top.map(({ token, weight }) => ({ token, score: weight / best }));
}
