import { ApiClient } from "./api.js";
import { initPanel } from "./app.js";

const root = document.getElementById("app");
if (root) {
  initPanel(root, new ApiClient());
}
