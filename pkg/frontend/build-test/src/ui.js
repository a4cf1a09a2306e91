import { formatScenario } from './store.js';
const MAX_TRAJECTORY_POINTS = 400;
function el(tag, className, text) {
    const node = document.createElement(tag);
    if (className)
        node.className = className;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
function renderCategoryGroup(store, controller, category) {
    const group = el('section', `category ${category.side}`);
    const heading = el('h3', 'category-name', `${category.id} · ${category.name}`);
    group.appendChild(heading);
    for (const factor of store.factors.filter((f) => f.category === category.id)) {
        const slider = store.sliders.get(factor.id);
        const row = el('div', 'factor-row');
        row.dataset.factor = factor.id;
        const label = el('label', 'factor-name', factor.name);
        label.htmlFor = `slider-${factor.id}`;
        const input = el('input');
        input.type = 'range';
        input.id = `slider-${factor.id}`;
        input.min = '1';
        input.max = '9';
        input.step = '1';
        input.value = String(slider.level);
        input.addEventListener('input', () => {
            controller.onLevelChange(factor.id, Number(input.value));
        });
        const value = el('output', 'level-value', String(slider.level));
        const lock = el('button', 'lock-toggle', slider.locked ? 'locked' : 'free');
        lock.type = 'button';
        lock.title = 'Locked factors keep their level during optimization';
        lock.addEventListener('click', () => store.toggleLock(factor.id));
        row.append(label, input, value, lock);
        group.appendChild(row);
    }
    return group;
}
function syncFactorRows(store, root) {
    for (const row of root.querySelectorAll('.factor-row')) {
        const slider = store.sliders.get(row.dataset.factor);
        const input = row.querySelector('input[type=range]');
        if (document.activeElement !== input)
            input.value = String(slider.level);
        row.querySelector('.level-value').textContent = String(slider.level);
        const lock = row.querySelector('.lock-toggle');
        lock.textContent = slider.locked ? 'locked' : 'free';
        row.classList.toggle('locked', slider.locked);
    }
}
function renderReadouts(store) {
    const gauge = document.getElementById('probability-gauge');
    const costBar = document.getElementById('cost-bar');
    const costText = document.getElementById('cost-text');
    const fitnessText = document.getElementById('fitness-text');
    const deltaText = document.getElementById('delta-text');
    if (!store.current)
        return;
    const readout = formatScenario(store.current, store.baseline);
    gauge.style.setProperty('--value', readout.pAgg);
    gauge.textContent = readout.pAgg;
    const catalogSize = store.factors.length;
    const span = 8 * catalogSize || 1;
    const frac = (readout.cost - catalogSize) / span;
    costBar.style.setProperty('--value', String(frac));
    costText.textContent = `cost ${readout.cost} (norm ${readout.cNorm})`;
    if (store.localCost() !== store.current.cost) {
        costText.textContent += ' (local sum disagrees with service!)';
    }
    fitnessText.textContent = `fitness ${readout.fitness}`;
    deltaText.textContent =
        readout.deltaVsBaseline === null ? '' : `Δ vs baseline ${readout.deltaVsBaseline}`;
}
function renderTrajectory(store) {
    const svg = document.getElementById('trajectory');
    const points = store.ga.trajectory.slice(0, MAX_TRAJECTORY_POINTS);
    if (points.length === 0) {
        svg.innerHTML = '';
        return;
    }
    const min = Math.min(...points);
    const max = Math.max(...points);
    const spanY = max - min || 1;
    const coords = points
        .map((value, i) => {
        const x = points.length === 1 ? 0 : (i / (points.length - 1)) * 100;
        const y = 40 - ((value - min) / spanY) * 38 - 1;
        return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
        .join(' ');
    svg.innerHTML = `<polyline fill="none" stroke="currentColor" stroke-width="1" points="${coords}" />`;
}
function renderGaPanel(store) {
    const status = document.getElementById('ga-status');
    const run = document.getElementById('run-ga');
    const apply = document.getElementById('apply-best');
    const { scope } = store.partition();
    run.disabled = !store.canRunGa() || store.ga.phase === 'running' || store.ga.phase === 'queued';
    run.textContent = `Optimize ${scope.length} unlocked`;
    apply.disabled = store.ga.phase !== 'done' || !store.ga.best;
    switch (store.ga.phase) {
        case 'idle':
            status.textContent = '';
            break;
        case 'queued':
            status.textContent = 'queued: another optimization is running';
            break;
        case 'running':
            status.textContent = `running… generation ${store.ga.trajectory.length}`;
            break;
        case 'done':
            status.textContent = `done: best fitness ${store.ga.bestFitness?.toFixed(4)} (Δ ${store.ga.deltaFitness?.toFixed(4)})`;
            break;
        case 'failed':
            status.textContent = `failed: ${store.ga.error}`;
            break;
    }
    renderTrajectory(store);
}
export function mount(store, controller) {
    const panel = document.getElementById('factor-panel');
    const banner = document.getElementById('error-banner');
    const rebuild = () => {
        panel.innerHTML = '';
        for (const category of store.categories) {
            panel.appendChild(renderCategoryGroup(store, controller, category));
        }
    };
    store.subscribe(() => {
        banner.classList.toggle('visible', store.loadError !== null);
        if (store.loadError) {
            banner.querySelector('.message').textContent = store.loadError;
            return;
        }
        if (panel.childElementCount === 0 && store.factors.length > 0)
            rebuild();
        syncFactorRows(store, panel);
        renderReadouts(store);
        renderGaPanel(store);
    });
    document.getElementById('run-ga').addEventListener('click', () => {
        void controller.runScopedGa(Math.floor(Math.random() * 1000000)).catch(() => {
            /* surfaced through the GA status line */
        });
    });
    document.getElementById('apply-best').addEventListener('click', () => {
        void controller.applyBest();
    });
    document.getElementById('retry-load').addEventListener('click', () => {
        banner.classList.remove('visible');
        void controller.loadWorkspace().catch(() => {
            /* error already in the store */
        });
    });
}
