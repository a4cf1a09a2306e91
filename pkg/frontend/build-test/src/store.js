const IDLE_GA = {
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
    constructor() {
        this.factors = [];
        this.categories = [];
        this.baselineLevels = {};
        this.sliders = new Map();
        this.current = null;
        this.baseline = null;
        this.ga = IDLE_GA;
        this.loadError = null;
        this.listeners = new Set();
    }
    subscribe(listener) {
        this.listeners.add(listener);
        return () => this.listeners.delete(listener);
    }
    emit() {
        for (const listener of this.listeners)
            listener();
    }
    initialize(catalog) {
        this.factors = catalog.factors;
        this.categories = catalog.categories;
        this.baselineLevels = { ...catalog.baseline };
        this.sliders = new Map(catalog.factors.map((f) => [
            f.id,
            { factorId: f.id, level: catalog.baseline[f.id], locked: false },
        ]));
        this.loadError = null;
        this.emit();
    }
    setLoadError(message) {
        this.loadError = message;
        this.emit();
    }
    setLevel(factorId, level) {
        const slider = this.sliders.get(factorId);
        if (!slider)
            throw new Error(`unknown factor ${factorId}`);
        if (!Number.isInteger(level) || level < 1 || level > 9) {
            throw new Error(`level must be an integer in 1..9, got ${level}`);
        }
        slider.level = level;
        this.emit();
    }
    toggleLock(factorId) {
        const slider = this.sliders.get(factorId);
        if (!slider)
            throw new Error(`unknown factor ${factorId}`);
        slider.locked = !slider.locked;
        this.emit();
    }
    /** Current slider levels as a full allocation, in catalog order. */
    allocation() {
        const out = {};
        for (const f of this.factors)
            out[f.id] = this.sliders.get(f.id).level;
        return out;
    }
    /** Local cost sum; must agree with the service's cost value exactly. */
    localCost() {
        let total = 0;
        for (const f of this.factors)
            total += this.sliders.get(f.id).level;
        return total;
    }
    /** Unlocked factors become the GA scope; locked levels become context. */
    partition() {
        const scope = [];
        const context = {};
        for (const f of this.factors) {
            const slider = this.sliders.get(f.id);
            if (slider.locked)
                context[f.id] = slider.level;
            else
                scope.push(f.id);
        }
        return { scope, context };
    }
    canRunGa() {
        return this.partition().scope.length > 0;
    }
    setCurrent(response) {
        this.current = response;
        this.emit();
    }
    setBaselineResponse(response) {
        this.baseline = response;
        this.emit();
    }
    resetGa() {
        this.ga = { ...IDLE_GA, trajectory: [] };
        this.emit();
    }
    updateGa(patch) {
        this.ga = { ...this.ga, ...patch };
        this.emit();
    }
    applyAllocation(levels) {
        for (const [factorId, level] of Object.entries(levels)) {
            const slider = this.sliders.get(factorId);
            if (slider)
                slider.level = level;
        }
        this.emit();
    }
}
export function formatScenario(current, baseline, digits = 4) {
    const scale = 10 ** digits;
    const pUnits = Math.round(current.p_agg * scale);
    const cUnits = Math.round(current.c_norm * scale);
    const fitnessUnits = pUnits - cUnits;
    let delta = null;
    if (baseline) {
        const baseUnits = Math.round(baseline.p_agg * scale) - Math.round(baseline.c_norm * scale);
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
