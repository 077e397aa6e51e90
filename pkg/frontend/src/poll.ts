/** Ensemble job polling at a fixed interval, with injectable timers so the
 * cadence is testable without real time. */

import { ApiClient } from "./api.js";
import { EnsembleStatus } from "./types.js";

export const POLL_INTERVAL_MS = 500;

export type Sleeper = (ms: number) => Promise<void>;

const realSleep: Sleeper = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

export async function pollEnsemble(
  client: ApiClient,
  job: string,
  onUpdate?: (status: EnsembleStatus) => void,
  sleep: Sleeper = realSleep,
  maxPolls = 2400, // 20 minutes at the default cadence
): Promise<EnsembleStatus> {
  for (let i = 0; i < maxPolls; i++) {
    const status = await client.ensembleStatus(job);
    onUpdate?.(status);
    if (status.status === "done") {
      return status;
    }
    if (status.status === "error") {
      throw new Error(status.error ?? "ensemble job failed");
    }
    await sleep(POLL_INTERVAL_MS);
  }
  throw new Error(`ensemble job ${job} did not finish after ${maxPolls} polls`);
}
