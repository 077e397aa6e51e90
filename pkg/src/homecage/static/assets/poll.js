/** Ensemble job polling at a fixed interval, with injectable timers so the
 * cadence is testable without real time. */
export const POLL_INTERVAL_MS = 500;
const realSleep = (ms) => new Promise((resolve) => setTimeout(resolve, ms));
export async function pollEnsemble(client, job, onUpdate, sleep = realSleep, maxPolls = 2400) {
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
