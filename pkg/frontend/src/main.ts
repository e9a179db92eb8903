import { ApiClient } from "./api";
import { createApp } from "./app";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const app = createApp(root, new ApiClient());
void app.refreshHealth();
setInterval(() => void app.refreshHealth(), 15_000);
