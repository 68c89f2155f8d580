import { boot, queryShell } from "./app.js";

// Entry point for the deployed bundle: the gateway serves this page, so all
// API paths are relative to the page's own origin.
void boot(queryShell(document), "");
