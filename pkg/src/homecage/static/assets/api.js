/** Typed client for the explorer service.
 *
 * Every displayed number comes from these responses untouched (the UI never
 * recounts membership).  Identical concurrent requests are de-duplicated:
 * callers share one in-flight promise per endpoint + body.
 */
export class ApiError extends Error {
    constructor(message, status) {
        super(message);
        this.status = status;
    }
}
export class ApiClient {
    constructor(baseUrl = "", fetchFn = (url, init) => fetch(url, init)) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
        this.inflight = new Map();
    }
    async request(method, path, body) {
        const key = `${method} ${path} ${body === undefined ? "" : JSON.stringify(body)}`;
        const pending = this.inflight.get(key);
        if (pending) {
            return pending;
        }
        const promise = (async () => {
            const init = { method };
            if (body !== undefined) {
                init.headers = { "content-type": "application/json" };
                init.body = JSON.stringify(body);
            }
            const response = await this.fetchFn(this.baseUrl + path, init);
            if (!response.ok) {
                let detail = `${response.status}`;
                try {
                    const payload = await response.json();
                    detail = payload.detail ?? payload.error ?? detail;
                }
                catch {
                    /* non-JSON error body */
                }
                throw new ApiError(String(detail), response.status);
            }
            return (await response.json());
        })();
        this.inflight.set(key, promise);
        try {
            return await promise;
        }
        finally {
            this.inflight.delete(key);
        }
    }
    embedding() {
        return this.request("GET", "/api/embedding");
    }
    meta() {
        return this.request("GET", "/api/meta");
    }
    query(region) {
        return this.request("POST", "/api/query", region);
    }
    labels() {
        return this.request("GET", "/api/labels");
    }
    createLabel(region, text, author = "") {
        return this.request("POST", "/api/labels", { region, text, author });
    }
    deleteLabel(id) {
        return this.request("DELETE", `/api/labels/${id}`);
    }
    startEnsemble(region, params = {}) {
        return this.request("POST", "/api/ensemble", { ...region, ...params });
    }
    ensembleStatus(job) {
        return this.request("GET", `/api/ensemble/${job}`);
    }
    frameUrl(job, t) {
        return `${this.baseUrl}/api/ensemble/${job}/frame/${t}`;
    }
}
