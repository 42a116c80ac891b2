/**
 * Line protocol between the benchmarking engine and an external predictor.
 *
 * One JSON object per line on stdin/stdout; message shapes are frozen in
 * the engine repository's PROTOCOL.md. The session is synchronous: one
 * request at a time, replies in request order.
 */

import * as readline from "readline";

export interface InitMessage {
  type: "init";
  protocol: number;
  vocabulary: Record<string, number>;
  pad_size: number;
  ngram_size: number;
  feature_names: string[];
}

export interface PredictMessage {
  type: "predict";
  request_id: number;
  input_ids: number[];
  time_features: number[][];
  m: number;
}

export interface CapabilitiesReply {
  type: "capabilities";
  vocab_size: number;
  supports_multi_step: boolean;
  max_m: number;
  supports_remaining_time: boolean;
  supports_time_delta: boolean;
}

export interface PredictionReply {
  type: "prediction";
  request_id: number;
  probabilities: number[][];
  delta_days?: number[];
  remaining_days?: number;
}

export interface ErrorReply {
  type: "error";
  message: string;
}

export type Reply = CapabilitiesReply | PredictionReply | ErrorReply;

/** Static context received in the init message. */
export interface SessionContext {
  vocabulary: Record<string, number>;
  padSize: number;
  ngramSize: number;
  featureNames: string[];
}

/** Model output for one predict request (m steps). */
export interface ModelOutput {
  probabilities: number[][];
  deltaDays?: number[];
  remainingDays?: number;
}

export type ModelCallback = (
  inputIds: number[],
  timeFeatures: number[][],
  m: number,
  context: SessionContext
) => ModelOutput;

export interface ModelCapabilities {
  supportsMultiStep: boolean;
  maxM: number;
  supportsRemainingTime: boolean;
  supportsTimeDelta: boolean;
}

const DEFAULT_CAPABILITIES: ModelCapabilities = {
  supportsMultiStep: false,
  maxM: 1,
  supportsRemainingTime: true,
  supportsTimeDelta: true,
};

/**
 * Protocol state machine, independent of any transport so it can be unit
 * tested line by line. `handleLine` returns the reply to write (or null
 * for shutdown, after which the session is closed).
 */
export class AdapterSession {
  private context: SessionContext | null = null;
  closed = false;

  constructor(
    private readonly model: ModelCallback,
    private readonly capabilities: ModelCapabilities = DEFAULT_CAPABILITIES
  ) {}

  handleLine(line: string): Reply | null {
    const trimmed = line.trim();
    if (trimmed === "") {
      return { type: "error", message: "empty line" };
    }
    let message: unknown;
    try {
      message = JSON.parse(trimmed);
    } catch (err) {
      return { type: "error", message: `malformed JSON: ${String(err)}` };
    }
    if (typeof message !== "object" || message === null || Array.isArray(message)) {
      return { type: "error", message: "message must be a JSON object" };
    }
    const kind = (message as { type?: unknown }).type;
    switch (kind) {
      case "init":
        return this.onInit(message as InitMessage);
      case "predict":
        return this.onPredict(message as PredictMessage);
      case "shutdown":
        this.closed = true;
        return null;
      default:
        return { type: "error", message: `unknown message type: ${String(kind)}` };
    }
  }

  private onInit(message: InitMessage): Reply {
    if (
      typeof message.vocabulary !== "object" ||
      message.vocabulary === null ||
      typeof message.pad_size !== "number" ||
      typeof message.ngram_size !== "number"
    ) {
      return { type: "error", message: "init message is missing required fields" };
    }
    this.context = {
      vocabulary: message.vocabulary,
      padSize: message.pad_size,
      ngramSize: message.ngram_size,
      featureNames: message.feature_names ?? [],
    };
    return {
      type: "capabilities",
      vocab_size: Object.keys(message.vocabulary).length,
      supports_multi_step: this.capabilities.supportsMultiStep,
      max_m: this.capabilities.maxM,
      supports_remaining_time: this.capabilities.supportsRemainingTime,
      supports_time_delta: this.capabilities.supportsTimeDelta,
    };
  }

  private onPredict(message: PredictMessage): Reply {
    if (this.context === null) {
      return { type: "error", message: "predict before init" };
    }
    if (typeof message.request_id !== "number" || !Array.isArray(message.input_ids)) {
      return { type: "error", message: "predict message is missing required fields" };
    }
    const m = typeof message.m === "number" && message.m >= 1 ? message.m : 1;
    let output: ModelOutput;
    try {
      output = this.model(message.input_ids, message.time_features ?? [], m, this.context);
    } catch (err) {
      return { type: "error", message: `model callback failed: ${String(err)}` };
    }
    const reply: PredictionReply = {
      type: "prediction",
      request_id: message.request_id,
      probabilities: output.probabilities,
    };
    if (output.deltaDays !== undefined) reply.delta_days = output.deltaDays;
    if (output.remainingDays !== undefined) reply.remaining_days = output.remainingDays;
    return reply;
  }
}

/**
 * Run a session over this process's stdin/stdout until shutdown or EOF.
 * Exits 0 on a clean shutdown message.
 */
export function serve(
  model: ModelCallback,
  capabilities: ModelCapabilities = DEFAULT_CAPABILITIES
): void {
  const session = new AdapterSession(model, capabilities);
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  rl.on("line", (line) => {
    const reply = session.handleLine(line);
    if (reply === null) {
      rl.close();
      process.exit(0);
    }
    process.stdout.write(JSON.stringify(reply) + "\n");
  });
  rl.on("close", () => {
    process.exit(session.closed ? 0 : 0);
  });
}
