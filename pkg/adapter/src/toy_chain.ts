/**
 * Deterministic toy model for end-to-end tests: a fixed three-step cyclic
 * chain over the first three activity ids, then END. Each step predicts a
 * point mass, a flat one-day delta, and steps-left days of remaining time.
 */

import { ModelCallback, ModelCapabilities, ModelOutput, SessionContext } from "./protocol";

const PAD = 0;
const START = 1;
const END = 2;
const FIRST_ACTIVITY = 4;
const CHAIN_LENGTH = 3;

export const TOY_CAPABILITIES: ModelCapabilities = {
  supportsMultiStep: false,
  maxM: 1,
  supportsRemainingTime: true,
  supportsTimeDelta: true,
};

function chainIds(context: SessionContext): number[] {
  const size = Object.keys(context.vocabulary).length;
  const ids: number[] = [];
  for (let id = FIRST_ACTIVITY; id < size && ids.length < CHAIN_LENGTH; id++) {
    ids.push(id);
  }
  return ids;
}

/** Next token of the chain given the last non-PAD token of the window. */
export function nextChainToken(inputIds: number[], context: SessionContext): number {
  const chain = chainIds(context);
  if (chain.length === 0) return END;
  let last = START;
  for (let i = inputIds.length - 1; i >= 0; i--) {
    if (inputIds[i] !== PAD) {
      last = inputIds[i];
      break;
    }
  }
  if (last === START) return chain[0];
  const position = chain.indexOf(last);
  if (position === -1 || position === chain.length - 1) return END;
  return chain[position + 1];
}

export const toyChainModel: ModelCallback = (
  inputIds,
  _timeFeatures,
  m,
  context
): ModelOutput => {
  const size = Object.keys(context.vocabulary).length;
  const chain = chainIds(context);
  const probabilities: number[][] = [];
  const deltas: number[] = [];
  let stepsLeft = 0;
  for (let step = 0; step < m; step++) {
    const token = nextChainToken(inputIds, context);
    const vector = new Array<number>(size).fill(0);
    vector[token] = 1;
    probabilities.push(vector);
    deltas.push(1.0);
    if (step === 0) {
      stepsLeft = token === END ? 0 : chain.length - chain.indexOf(token);
    }
    inputIds = inputIds.concat([token]);
  }
  return { probabilities, deltaDays: deltas, remainingDays: stepsLeft };
};
