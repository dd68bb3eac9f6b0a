/** Poll a started experiment until it leaves the running state.
 *
 * Runs against remote geoparsers can take a long time, so the delay backs
 * off from 2 s to a 10 s ceiling instead of hammering the server.
 */

import type { ExperimentRecord } from "./api.js";

export interface PollOptions {
  initialDelayMs?: number;
  maxDelayMs?: number;
  factor?: number;
  sleep?: (ms: number) => Promise<void>;
  onAttempt?: (record: ExperimentRecord) => void;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export async function pollExperiment(
  fetchRecord: (id: string) => Promise<ExperimentRecord>,
  id: string,
  options: PollOptions = {},
): Promise<ExperimentRecord> {
  const initial = options.initialDelayMs ?? 2000;
  const max = options.maxDelayMs ?? 10000;
  const factor = options.factor ?? 2;
  const sleep = options.sleep ?? defaultSleep;

  let delay = initial;
  for (;;) {
    const record = await fetchRecord(id);
    options.onAttempt?.(record);
    if (record.status !== "running") {
      return record;
    }
    await sleep(delay);
    delay = Math.min(max, delay * factor);
  }
}
