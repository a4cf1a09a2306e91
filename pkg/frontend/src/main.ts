import { ApiClient } from './api.js';
import { ScenarioController } from './scenario.js';
import { Store } from './store.js';
import { mount } from './ui.js';

const apiBase =
  new URLSearchParams(window.location.search).get('api') ?? 'http://127.0.0.1:8000';

const store = new Store();
const controller = new ScenarioController(new ApiClient(apiBase), store);

document.addEventListener('DOMContentLoaded', () => {
  mount(store, controller);
  void controller.loadWorkspace().catch(() => {
    /* the error banner offers a retry */
  });
});
