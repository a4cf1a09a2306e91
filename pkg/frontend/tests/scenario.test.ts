import assert from 'node:assert/strict';
import { test } from 'node:test';

import { ScenarioController } from '../src/scenario.js';
import { Store } from '../src/store.js';
import { FakeApi } from './fake.js';

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

async function readyController(options: { debounceMs?: number; pollMs?: number } = {}) {
  const api = new FakeApi();
  const store = new Store();
  const controller = new ScenarioController(api, store, {
    debounceMs: options.debounceMs ?? 10,
    pollMs: options.pollMs ?? 5,
  });
  await controller.loadWorkspace();
  return { api, store, controller };
}

test('loadWorkspace initializes sliders and scores the baseline', async () => {
  const { api, store } = await readyController();
  assert.equal(store.sliders.size, 3);
  assert.ok(store.baseline);
  assert.ok(store.current);
  assert.equal(api.evaluateCalls.length, 1);
  assert.deepEqual(api.evaluateCalls[0].allocation, store.allocation());
});

test('load failure lands in the store error state', async () => {
  const api = new FakeApi();
  api.getCatalog = async () => {
    throw new Error('connection refused');
  };
  const store = new Store();
  const controller = new ScenarioController(api, store);
  await assert.rejects(() => controller.loadWorkspace(), /connection refused/);
  assert.match(store.loadError ?? '', /connection refused/);
});

test('rapid slider edits collapse into one evaluate after the quiet period', async () => {
  const { api, store, controller } = await readyController({ debounceMs: 20 });
  const before = api.evaluateCalls.length;
  controller.onLevelChange('alpha', 6);
  controller.onLevelChange('alpha', 7);
  controller.onLevelChange('beta', 2);
  assert.equal(api.evaluateCalls.length, before); // still inside the window
  await controller.settle();
  assert.equal(api.evaluateCalls.length, before + 1);
  assert.deepEqual(api.evaluateCalls.at(-1)!.allocation, { alpha: 7, beta: 2, gamma: 6 });
  assert.equal(store.current!.cost, store.localCost());
});

test('stale evaluate responses are discarded by sequence number', async () => {
  const { api, store, controller } = await readyController();
  api.deferEvaluates = true;
  const first = controller.evaluateNow(); // seq 1, will resolve last
  controller.store.setLevel('alpha', 9);
  const second = controller.evaluateNow(); // seq 2
  api.release(1); // newer response arrives first
  await second;
  const applied = store.current!;
  api.release(0); // stale response arrives late
  await first;
  assert.deepEqual(store.current, applied); // unchanged by the stale reply
});

test('scoped GA run posts unlocked scope and locked context, then applies', async () => {
  const { api, store, controller } = await readyController();
  store.toggleLock('gamma');
  store.setLevel('gamma', 8);
  const job = await controller.runScopedGa(42, { population: 10 });
  assert.equal(job.status, 'done');
  assert.deepEqual(api.optimizeCalls[0].scope, ['alpha', 'beta']);
  assert.deepEqual(api.optimizeCalls[0].context, { gamma: 8 });
  assert.equal(api.optimizeCalls[0].seed, 42);
  assert.equal(store.ga.phase, 'done');
  assert.deepEqual(store.ga.trajectory, api.job.trajectory);
  assert.equal(store.ga.bestFitness, api.job.result!.best_report.fitness);

  await controller.applyBest();
  assert.deepEqual(store.allocation(), api.job.result!.best);
  // apply-then-evaluate refreshed the scenario from the service
  assert.deepEqual(api.evaluateCalls.at(-1)!.allocation, api.job.result!.best);
});

test('job-limit conflicts surface as queued and retry until accepted', async () => {
  const { api, store, controller } = await readyController();
  api.rejectSubmissions = 2;
  const phases: string[] = [];
  store.subscribe(() => phases.push(store.ga.phase));
  const job = await controller.runScopedGa(7);
  assert.equal(job.status, 'done');
  assert.ok(phases.includes('queued'));
  assert.equal(api.optimizeCalls.length, 3); // two rejected + one accepted
});

test('failed jobs propagate their error', async () => {
  const { api, store, controller } = await readyController();
  api.pollsUntilDone = 0;
  api.job = { ...api.job, status: 'failed', result: null, error: 'boom' };
  await assert.rejects(() => controller.runScopedGa(1), /boom/);
  assert.equal(store.ga.phase, 'failed');
  assert.equal(store.ga.error, 'boom');
});

test('running with every factor locked is refused', async () => {
  const { store, controller } = await readyController();
  for (const f of store.factors) store.toggleLock(f.id);
  await assert.rejects(() => controller.runScopedGa(1), /no unlocked factors/);
});

test('trajectory grows across polls while the job runs', async () => {
  const { api, store, controller } = await readyController({ pollMs: 2 });
  api.pollsUntilDone = 3;
  const seen: number[] = [];
  store.subscribe(() => seen.push(store.ga.trajectory.length));
  await controller.runScopedGa(9);
  assert.deepEqual(store.ga.trajectory, api.job.trajectory);
  assert.ok(seen.some((n) => n > 0 && n < api.job.trajectory.length));
  await sleep(1);
});
