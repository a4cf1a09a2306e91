/**
 * In-memory service fake exercising the wire contract. Probabilities are
 * arbitrary but deterministic; cost arithmetic follows the contract so cost
 * identities remain checkable. Real-service agreement is covered by the
 * integration suite.
 */
import { ApiError } from '../src/api.js';
export const TEST_CATALOG = {
    categories: [
        { id: 'G1', name: 'Group One', side: 'motivator' },
        { id: 'G2', name: 'Group Two', side: 'demotivator' },
    ],
    factors: [
        { id: 'alpha', name: 'Alpha', kind: 'motivator', category: 'G1' },
        { id: 'beta', name: 'Beta', kind: 'motivator', category: 'G1' },
        { id: 'gamma', name: 'Gamma', kind: 'demotivator', category: 'G2' },
    ],
    baseline: { alpha: 5, beta: 4, gamma: 6 },
};
export class FakeApi {
    constructor() {
        this.evaluateCalls = [];
        this.optimizeCalls = [];
        this.jobPolls = 0;
        /** Queue of deferred evaluate resolvers for supersession tests. */
        this.deferEvaluates = false;
        this.pending = [];
        /** Number of initial submitOptimize calls to reject with 409. */
        this.rejectSubmissions = 0;
        /** Polls to answer "running" before the job completes. */
        this.pollsUntilDone = 2;
        this.job = {
            id: 'job-1',
            status: 'done',
            trajectory: [0.1, 0.2, 0.3],
            result: {
                best: { alpha: 1, beta: 2, gamma: 1 },
                best_report: { probability: 0.8, cost: 4, norm_cost: 0.0417, fitness: 0.7583 },
                baseline_report: { probability: 0.7, cost: 15, norm_cost: 0.5, fitness: 0.2 },
                delta_fitness: 0.5583,
                scope: ['alpha', 'beta', 'gamma'],
                context: {},
                seed: 1,
            },
            error: null,
        };
    }
    score(body) {
        const ids = TEST_CATALOG.factors.map((f) => f.id);
        const scope = body.scope ?? ids;
        const cost = scope.reduce((acc, fid) => acc + body.allocation[fid], 0);
        const cNorm = (cost - scope.length) / (8 * scope.length);
        // deterministic pseudo-probabilities, NOT derived from any model
        const total = ids.reduce((acc, fid) => acc + body.allocation[fid], 0);
        const pNb = 0.3 + 0.02 * (total % 10);
        const pLr = 0.5 + 0.01 * (total % 7);
        const pAgg = (pNb + pLr) / 2;
        return { p_nb: pNb, p_lr: pLr, p_agg: pAgg, cost, c_norm: cNorm, fitness: pAgg - cNorm };
    }
    async getCatalog() {
        return structuredClone(TEST_CATALOG);
    }
    async getDescriptives() {
        return { rows: [] };
    }
    evaluate(body) {
        this.evaluateCalls.push(structuredClone(body));
        if (this.deferEvaluates) {
            return new Promise((resolve) => this.pending.push({ body, resolve }));
        }
        return Promise.resolve(this.score(body));
    }
    /** Resolve the pending evaluate at `index` with its computed response. */
    release(index) {
        const entry = this.pending[index];
        if (!entry)
            throw new Error(`no pending evaluate at ${index}`);
        entry.resolve(this.score(entry.body));
    }
    async submitOptimize(body) {
        this.optimizeCalls.push(structuredClone(body));
        if (this.rejectSubmissions > 0) {
            this.rejectSubmissions -= 1;
            throw new ApiError(409, 'optimization job limit reached; retry later');
        }
        return { job_id: this.job.id };
    }
    async getJob(jobId) {
        if (jobId !== this.job.id)
            throw new ApiError(404, `unknown job ${jobId}`);
        this.jobPolls += 1;
        if (this.jobPolls <= this.pollsUntilDone) {
            return {
                id: this.job.id,
                status: 'running',
                trajectory: this.job.trajectory.slice(0, this.jobPolls),
                result: null,
                error: null,
            };
        }
        return structuredClone(this.job);
    }
}
