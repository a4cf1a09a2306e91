import { Api, ApiError } from './api.js';
import { Store } from './store.js';
import type { JobStatus, OptimizeParams } from './types.js';

export interface ControllerOptions {
  /** Quiet period after the last slider edit before evaluating. */
  debounceMs?: number;
  /** Interval between job status polls. */
  pollMs?: number;
  /** Delay before retrying a 409 (job limit) submission. */
  queueRetryMs?: number;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/**
 * Orchestrates service calls for the page: debounced re-evaluation on slider
 * edits (stale responses dropped by sequence number), and the scoped GA job
 * lifecycle with 500 ms polling.
 */
export class ScenarioController {
  private readonly debounceMs: number;
  private readonly pollMs: number;
  private readonly queueRetryMs: number;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private evaluateSeq = 0;
  private appliedSeq = 0;
  private pendingEvaluation: Promise<void> = Promise.resolve();

  constructor(
    readonly api: Api,
    readonly store: Store,
    options: ControllerOptions = {}
  ) {
    this.debounceMs = options.debounceMs ?? 100;
    this.pollMs = options.pollMs ?? 500;
    this.queueRetryMs = options.queueRetryMs ?? options.pollMs ?? 500;
  }

  /** Fetch the catalog, initialize sliders at baseline, and score it. */
  async loadWorkspace(): Promise<void> {
    try {
      const catalog = await this.api.getCatalog();
      this.store.initialize(catalog);
    } catch (err) {
      this.store.setLoadError(err instanceof Error ? err.message : String(err));
      throw err;
    }
    const baseline = await this.api.evaluate({ allocation: this.store.allocation() });
    this.store.setBaselineResponse(baseline);
    this.store.setCurrent(baseline);
  }

  /** Slider edit: update state now, re-evaluate after the quiet period. */
  onLevelChange(factorId: string, level: number): void {
    this.store.setLevel(factorId, level);
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      this.pendingEvaluation = this.evaluateNow();
    }, this.debounceMs);
  }

  /**
   * Evaluate the current allocation; stale responses are discarded. Cost is
   * scoped to the unlocked factors so the scenario readout matches scoped
   * optimization results; with nothing locked that is exactly global scope.
   */
  async evaluateNow(): Promise<void> {
    const seq = ++this.evaluateSeq;
    const { scope } = this.store.partition();
    const response = await this.api.evaluate({
      allocation: this.store.allocation(),
      scope,
    });
    if (seq < this.appliedSeq) return; // superseded while in flight
    this.appliedSeq = seq;
    this.store.setCurrent(response);
  }

  /** Resolves once the most recent debounced evaluation has landed. */
  async settle(): Promise<void> {
    while (this.debounceTimer !== null) await sleep(this.debounceMs / 2 + 1);
    await this.pendingEvaluation;
  }

  /**
   * Run the GA over the unlocked factors, holding locked factors fixed as
   * context. A 409 from the job limit surfaces as a queued state and the
   * submission retries until a slot opens.
   */
  async runScopedGa(seed: number, params?: OptimizeParams): Promise<JobStatus> {
    const { scope, context } = this.store.partition();
    if (scope.length === 0) throw new Error('no unlocked factors to optimize');
    this.store.resetGa();

    let jobId: string | null = null;
    while (jobId === null) {
      try {
        const submitted = await this.api.submitOptimize({ seed, scope, context, params });
        jobId = submitted.job_id;
      } catch (err) {
        if (err instanceof ApiError && err.status === 409) {
          this.store.updateGa({ phase: 'queued' });
          await sleep(this.queueRetryMs);
          continue;
        }
        this.store.updateGa({ phase: 'failed', error: String(err) });
        throw err;
      }
    }
    this.store.updateGa({ phase: 'running', jobId });

    for (;;) {
      const job = await this.api.getJob(jobId);
      this.store.updateGa({ trajectory: job.trajectory });
      if (job.status === 'done' && job.result) {
        this.store.updateGa({
          phase: 'done',
          best: job.result.best,
          bestFitness: job.result.best_report.fitness,
          deltaFitness: job.result.delta_fitness,
        });
        return job;
      }
      if (job.status === 'failed') {
        this.store.updateGa({ phase: 'failed', error: job.error });
        throw new Error(job.error ?? 'optimization failed');
      }
      await sleep(this.pollMs);
    }
  }

  /** Move sliders to the job's best allocation and rescore. */
  async applyBest(): Promise<void> {
    const best = this.store.ga.best;
    if (!best) throw new Error('no finished optimization to apply');
    this.store.applyAllocation(best);
    await this.evaluateNow();
  }
}
