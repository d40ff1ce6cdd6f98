import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

/** Mount the real index.html body into the jsdom document. */
export function mountMarkup() {
  const html = readFileSync(join(here, "..", "src", "index.html"), "utf-8");
  const body = html.substring(html.indexOf("<body>") + 6, html.indexOf("</body>"));
  document.body.innerHTML = body;
}
