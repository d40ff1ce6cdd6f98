import { ChatApp } from "./app.js";

const app = new ChatApp(document, "");
void app.init();

// exposed for debugging in the browser console
(window as unknown as { dialoglab: ChatApp }).dialoglab = app;
