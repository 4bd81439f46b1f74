import { Viewer } from "./viewer.js";

const params = new URLSearchParams(window.location.search);
const url = params.get("ws") ?? "ws://127.0.0.1:8765";

new Viewer(
  url,
  document.getElementById("frame") as HTMLCanvasElement,
  document.getElementById("banner") as HTMLElement,
  document.getElementById("hud") as HTMLElement,
);
