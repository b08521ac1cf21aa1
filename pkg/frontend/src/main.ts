import { mountApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const serviceUrl = params.get("service") ?? window.location.origin;

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
mountApp(root, serviceUrl);
