import { describe, expect, it } from "vitest";

import {
  AdapterSession,
  CapabilitiesReply,
  ErrorReply,
  PredictionReply,
  SessionContext,
} from "../src/protocol";
import { TOY_CAPABILITIES, nextChainToken, toyChainModel } from "../src/toy_chain";

const VOCABULARY = { "<PAD>": 0, "<START>": 1, "<END>": 2, "<UNK>": 3, A: 4, B: 5, C: 6 };

const INIT = JSON.stringify({
  type: "init",
  protocol: 1,
  vocabulary: VOCABULARY,
  pad_size: 8,
  ngram_size: 4,
  feature_names: [],
});

function predictLine(requestId: number, inputIds: number[], m = 1): string {
  return JSON.stringify({
    type: "predict",
    request_id: requestId,
    input_ids: inputIds,
    time_features: inputIds.map(() => [0, 0, 0, 0, 0]),
    m,
  });
}

function newSession(): AdapterSession {
  return new AdapterSession(toyChainModel, TOY_CAPABILITIES);
}

describe("AdapterSession", () => {
  it("replies to init with capabilities and the received vocab size", () => {
    const session = newSession();
    const reply = session.handleLine(INIT) as CapabilitiesReply;
    expect(reply.type).toBe("capabilities");
    expect(reply.vocab_size).toBe(7);
    expect(reply.supports_multi_step).toBe(false);
    expect(reply.max_m).toBe(1);
    expect(reply.supports_remaining_time).toBe(true);
    expect(reply.supports_time_delta).toBe(true);
  });

  it("echoes the request id and emits one unit-mass vector", () => {
    const session = newSession();
    session.handleLine(INIT);
    const reply = session.handleLine(predictLine(42, [0, 0, 1, 4])) as PredictionReply;
    expect(reply.type).toBe("prediction");
    expect(reply.request_id).toBe(42);
    expect(reply.probabilities).toHaveLength(1);
    const vector = reply.probabilities[0];
    expect(vector).toHaveLength(7);
    expect(vector.reduce((a, b) => a + b, 0)).toBeCloseTo(1.0, 12);
  });

  it("rejects predict before init but keeps the session alive", () => {
    const session = newSession();
    const reply = session.handleLine(predictLine(1, [1])) as ErrorReply;
    expect(reply.type).toBe("error");
    expect(session.closed).toBe(false);
    expect((session.handleLine(INIT) as CapabilitiesReply).type).toBe("capabilities");
  });

  it("answers malformed lines with an error and continues", () => {
    const session = newSession();
    session.handleLine(INIT);
    for (const garbage of ["{not json", "", "[1,2,3]", '"just a string"', "{}"]) {
      const reply = session.handleLine(garbage) as ErrorReply;
      expect(reply.type).toBe("error");
    }
    const after = session.handleLine(predictLine(7, [0, 0, 1, 4])) as PredictionReply;
    expect(after.type).toBe("prediction");
  });

  it("survives random garbage without throwing", () => {
    const session = newSession();
    session.handleLine(INIT);
    for (let i = 0; i < 200; i++) {
      let line = "";
      const length = Math.floor(Math.random() * 40);
      for (let j = 0; j < length; j++) {
        line += String.fromCharCode(32 + Math.floor(Math.random() * 90));
      }
      const reply = session.handleLine(line);
      expect(reply).not.toBeNull();
    }
    const after = session.handleLine(predictLine(9, [1])) as PredictionReply;
    expect(after.type).toBe("prediction");
  });

  it("returns null on shutdown and marks the session closed", () => {
    const session = newSession();
    session.handleLine(INIT);
    expect(session.handleLine(JSON.stringify({ type: "shutdown" }))).toBeNull();
    expect(session.closed).toBe(true);
  });
});

describe("toy chain model", () => {
  const context: SessionContext = {
    vocabulary: VOCABULARY,
    padSize: 8,
    ngramSize: 4,
    featureNames: [],
  };

  it("starts the chain from START", () => {
    expect(nextChainToken([0, 0, 0, 1], context)).toBe(4); // A
  });

  it("continues A -> B -> C", () => {
    expect(nextChainToken([0, 0, 1, 4], context)).toBe(5);
    expect(nextChainToken([0, 1, 4, 5], context)).toBe(6);
  });

  it("emits END after the third chain step", () => {
    expect(nextChainToken([1, 4, 5, 6], context)).toBe(2);
  });

  it("predicts one-day deltas and steps-left remaining time", () => {
    const fromStart = toyChainModel([0, 0, 0, 1], [], 1, context);
    expect(fromStart.deltaDays).toEqual([1.0]);
    expect(fromStart.remainingDays).toBe(3); // A, B, C still to come
    const atEnd = toyChainModel([1, 4, 5, 6], [], 1, context);
    expect(atEnd.remainingDays).toBe(0);
  });
});
