import { Client } from "./api.js";
import { AssessmentApp } from "./app.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
new AssessmentApp(root, new Client()).renderStart();
