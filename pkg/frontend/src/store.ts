import type {
  CatalogResponse,
  CategoryInfo,
  EvaluateResponse,
  FactorInfo,
  FactorSliderState,
  JobPhase,
} from './types.js';

export interface GaView {
  phase: JobPhase | 'idle' | 'queued';
  jobId: string | null;
  trajectory: number[];
  best: Record<string, number> | null;
  bestFitness: number | null;
  deltaFitness: number | null;
  error: string | null;
}

const IDLE_GA: GaView = {
  phase: 'idle',
  jobId: null,
  trajectory: [],
  best: null,
  bestFitness: null,
  deltaFitness: null,
  error: null,
};

/**
 * Single state store for the page. All numeric readouts come straight from
 * service responses; the store itself only tracks slider positions, lock
 * flags, and the latest responses.
 */
export class Store {
  factors: FactorInfo[] = [];
  categories: CategoryInfo[] = [];
  baselineLevels: Record<string, number> = {};
  sliders = new Map<string, FactorSliderState>();
  current: EvaluateResponse | null = null;
  baseline: EvaluateResponse | null = null;
  ga: GaView = IDLE_GA;
  loadError: string | null = null;

  private listeners = new Set<() => void>();

  subscribe(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  initialize(catalog: CatalogResponse): void {
    this.factors = catalog.factors;
    this.categories = catalog.categories;
    this.baselineLevels = { ...catalog.baseline };
    this.sliders = new Map(
      catalog.factors.map((f) => [
        f.id,
        { factorId: f.id, level: catalog.baseline[f.id], locked: false },
      ])
    );
    this.loadError = null;
    this.emit();
  }

  setLoadError(message: string): void {
    this.loadError = message;
    this.emit();
  }

  setLevel(factorId: string, level: number): void {
    const slider = this.sliders.get(factorId);
    if (!slider) throw new Error(`unknown factor ${factorId}`);
    if (!Number.isInteger(level) || level < 1 || level > 9) {
      throw new Error(`level must be an integer in 1..9, got ${level}`);
    }
    slider.level = level;
    this.emit();
  }

  toggleLock(factorId: string): void {
    const slider = this.sliders.get(factorId);
    if (!slider) throw new Error(`unknown factor ${factorId}`);
    slider.locked = !slider.locked;
    this.emit();
  }

  /** Current slider levels as a full allocation, in catalog order. */
  allocation(): Record<string, number> {
    const out: Record<string, number> = {};
    for (const f of this.factors) out[f.id] = this.sliders.get(f.id)!.level;
    return out;
  }

  /** Local cost sum; must agree with the service's cost value exactly. */
  localCost(): number {
    let total = 0;
    for (const f of this.factors) total += this.sliders.get(f.id)!.level;
    return total;
  }

  /** Unlocked factors become the GA scope; locked levels become context. */
  partition(): { scope: string[]; context: Record<string, number> } {
    const scope: string[] = [];
    const context: Record<string, number> = {};
    for (const f of this.factors) {
      const slider = this.sliders.get(f.id)!;
      if (slider.locked) context[f.id] = slider.level;
      else scope.push(f.id);
    }
    return { scope, context };
  }

  canRunGa(): boolean {
    return this.partition().scope.length > 0;
  }

  setCurrent(response: EvaluateResponse): void {
    this.current = response;
    this.emit();
  }

  setBaselineResponse(response: EvaluateResponse): void {
    this.baseline = response;
    this.emit();
  }

  resetGa(): void {
    this.ga = { ...IDLE_GA, trajectory: [] };
    this.emit();
  }

  updateGa(patch: Partial<GaView>): void {
    this.ga = { ...this.ga, ...patch };
    this.emit();
  }

  applyAllocation(levels: Record<string, number>): void {
    for (const [factorId, level] of Object.entries(levels)) {
      const slider = this.sliders.get(factorId);
      if (slider) slider.level = level;
    }
    this.emit();
  }
}

/**
 * Fixed-precision scenario readouts. The fitness string is derived from the
 * rounded probability and cost strings, so the displayed identity
 * fitness = p_agg - c_norm holds exactly at the shown precision.
 */
export interface ScenarioReadout {
  pAgg: string;
  cNorm: string;
  fitness: string;
  deltaVsBaseline: string | null;
  cost: number;
}

export function formatScenario(
  current: EvaluateResponse,
  baseline: EvaluateResponse | null,
  digits = 4
): ScenarioReadout {
  const scale = 10 ** digits;
  const pUnits = Math.round(current.p_agg * scale);
  const cUnits = Math.round(current.c_norm * scale);
  const fitnessUnits = pUnits - cUnits;
  let delta: string | null = null;
  if (baseline) {
    const baseUnits =
      Math.round(baseline.p_agg * scale) - Math.round(baseline.c_norm * scale);
    delta = ((fitnessUnits - baseUnits) / scale).toFixed(digits);
  }
  return {
    pAgg: (pUnits / scale).toFixed(digits),
    cNorm: (cUnits / scale).toFixed(digits),
    fitness: (fitnessUnits / scale).toFixed(digits),
    deltaVsBaseline: delta,
    cost: current.cost,
  };
}
