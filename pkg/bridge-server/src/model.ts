/**
 * Extension point for serving a trained model instead of a lookup table.
 *
 * A model adapter turns the serialized state (the same ASCII grid the
 * protocol carries) into action probabilities.  Wire one in by passing
 * `--model <spec>` and implementing `connectModel` for your runtime;
 * no inference runtime is bundled with this reference server.
 */

export interface PolicyModel {
  /** Probabilities for the fixed action order; must sum to 1. */
  evaluate(state: string): number[];
}

export function connectModel(spec: string): PolicyModel {
  throw new Error(
    `no model runtime is bundled with the reference server (requested ${JSON.stringify(spec)}); ` +
      "implement connectModel() against your inference stack or serve a --table instead",
  );
}
