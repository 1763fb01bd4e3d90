#!/usr/bin/env node
/**
 * Reference policy server for the policyts stdio bridge protocol.
 *
 * Speaks newline-delimited JSON on stdin/stdout: one handshake record on
 * startup, then one response per request, answered strictly in request
 * order (pipelined clients are fine).  With no `--table` every state
 * gets the uniform distribution; with one, unknown states fall back to
 * uniform.  A malformed request produces an error record carrying the
 * offending id (when recoverable) and the loop continues; end of input
 * exits cleanly.
 */

import * as readline from "node:readline";
import { connectModel, PolicyModel } from "./model";
import { ACTION_COUNT, LookupTable, loadTable, UNIFORM } from "./table";

interface Handshake {
  protocol_version: 1;
  action_count: number;
  is_markov: boolean;
}

interface CliOptions {
  tablePath: string | null;
  modelSpec: string | null;
}

function parseArgs(argv: string[]): CliOptions {
  const options: CliOptions = { tablePath: null, modelSpec: null };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--table") {
      options.tablePath = argv[++i] ?? usage("--table needs a path");
    } else if (arg === "--model") {
      options.modelSpec = argv[++i] ?? usage("--model needs a spec");
    } else if (arg === "--help" || arg === "-h") {
      usage();
    } else {
      usage(`unknown argument ${arg}`);
    }
  }
  return options;
}

function usage(problem?: string): never {
  if (problem) {
    process.stderr.write(`error: ${problem}\n`);
  }
  process.stderr.write("usage: policyts-bridge-server [--table <file> | --model <spec>]\n");
  process.exit(problem ? 2 : 0);
}

function respond(record: object): void {
  process.stdout.write(JSON.stringify(record) + "\n");
}

export function answer(
  line: string,
  table: LookupTable,
  model: PolicyModel | null,
): object {
  let id: unknown = null;
  try {
    const request = JSON.parse(line);
    id = request?.id;
    if (!Number.isInteger(request?.id)) {
      throw new Error("request must carry an integer id");
    }
    if (typeof request?.state !== "string") {
      throw new Error("request must carry a string state");
    }
    const probs = model
      ? model.evaluate(request.state)
      : table.get(request.state) ?? [...UNIFORM];
    return { id: request.id, probs };
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    return { id: Number.isInteger(id) ? id : null, error: message };
  }
}

function main(): void {
  const options = parseArgs(process.argv.slice(2));
  if (options.tablePath !== null && options.modelSpec !== null) {
    usage("--table and --model are mutually exclusive");
  }
  let table: LookupTable = new Map();
  let model: PolicyModel | null = null;
  try {
    if (options.tablePath !== null) {
      table = loadTable(options.tablePath);
    }
    if (options.modelSpec !== null) {
      model = connectModel(options.modelSpec);
    }
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    process.stderr.write(`error: ${message}\n`);
    process.exit(2);
  }

  const handshake: Handshake = {
    protocol_version: 1,
    action_count: ACTION_COUNT,
    is_markov: true,
  };
  respond(handshake);

  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  rl.on("line", (line) => {
    if (line === "") {
      return;
    }
    respond(answer(line, table, model));
  });
  rl.on("close", () => {
    process.exit(0);
  });
}

if (require.main === module) {
  main();
}
