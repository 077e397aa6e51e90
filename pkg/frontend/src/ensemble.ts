/** Ensemble job orchestration: one job per region, cached by region key so a
 * replay after completion hits the cache instead of issuing a new job. */

import { ApiClient } from "./api.js";
import { pollEnsemble, Sleeper } from "./poll.js";
import { EnsembleRequest, EnsembleStatus, Region, regionKey } from "./types.js";

export class EnsembleRunner {
  private completed = new Map<string, EnsembleStatus>();
  private running = new Map<string, Promise<EnsembleStatus>>();

  constructor(
    private readonly client: ApiClient,
    private readonly sleep?: Sleeper,
  ) {}

  /** Start (or reuse) the ensemble for a region; resolves when done. */
  run(
    region: Region,
    params: EnsembleRequest = {},
    onUpdate?: (status: EnsembleStatus) => void,
  ): Promise<EnsembleStatus> {
    const key = regionKey(region) + JSON.stringify(params);
    const cached = this.completed.get(key);
    if (cached) {
      onUpdate?.(cached);
      return Promise.resolve(cached);
    }
    const inflight = this.running.get(key);
    if (inflight) {
      return inflight;
    }
    const promise = (async () => {
      const { job } = await this.client.startEnsemble(region, params);
      const status = await pollEnsemble(this.client, job, onUpdate, this.sleep);
      this.completed.set(key, status);
      return status;
    })();
    this.running.set(key, promise);
    promise.finally(() => this.running.delete(key));
    return promise;
  }

  cachedFor(region: Region, params: EnsembleRequest = {}): EnsembleStatus | undefined {
    return this.completed.get(regionKey(region) + JSON.stringify(params));
  }
}
