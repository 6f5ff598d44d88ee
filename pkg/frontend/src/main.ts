import { ApiClient } from "./api.js";
import { App } from "./screens.js";

const SERVER = (window as { HATELAB_SERVER?: string }).HATELAB_SERVER ?? "";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
new App(root, new ApiClient(SERVER)).start();
