import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  createApp(document, window, root, new ApiClient());
}
