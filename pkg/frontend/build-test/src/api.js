export class ApiError extends Error {
    constructor(status, message, field) {
        super(message);
        this.status = status;
        this.field = field;
    }
}
async function request(url, init) {
    let response;
    try {
        response = await fetch(url, init);
    }
    catch (err) {
        throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) {
        const err = body && typeof body === 'object' ? body.error : null;
        throw new ApiError(response.status, err?.message ?? `HTTP ${response.status}`, err?.field);
    }
    return body;
}
/** Thin typed client over the /api endpoints; performs no math of its own. */
export class ApiClient {
    constructor(baseUrl) {
        this.baseUrl = baseUrl;
    }
    url(path) {
        return this.baseUrl.replace(/\/$/, '') + path;
    }
    getCatalog() {
        return request(this.url('/api/catalog'));
    }
    getDescriptives() {
        return request(this.url('/api/descriptives'));
    }
    evaluate(body) {
        return request(this.url('/api/evaluate'), {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(body),
        });
    }
    submitOptimize(body) {
        return request(this.url('/api/optimize'), {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(body),
        });
    }
    getJob(jobId) {
        return request(this.url(`/api/optimize/${jobId}`));
    }
}
