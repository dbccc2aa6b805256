import { readFile } from "node:fs/promises";
import { fileURLToPath } from "node:url";
import path from "node:path";

import type { FetchLike } from "../src/loader.js";

const FIXTURES = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures", "snapshots");

/** fetch stand-in serving the committed snapshot fixture directory. */
export function fixtureFetch(options?: {
  missing?: string[];
  corrupt?: string[];
}): FetchLike {
  return async (url: string) => {
    const name = url.split("/").pop()!;
    if (options?.missing?.includes(name)) {
      return { ok: false, status: 404, json: async () => ({}) };
    }
    if (options?.corrupt?.includes(name)) {
      return {
        ok: true,
        status: 200,
        json: async () => {
          throw new SyntaxError("Unexpected token in JSON");
        },
      };
    }
    let text: string;
    try {
      text = await readFile(path.join(FIXTURES, name), "utf-8");
    } catch {
      return { ok: false, status: 404, json: async () => ({}) };
    }
    return { ok: true, status: 200, json: async () => JSON.parse(text) };
  };
}

export async function fixtureDoc<T>(name: string): Promise<T> {
  return JSON.parse(await readFile(path.join(FIXTURES, name), "utf-8")) as T;
}
