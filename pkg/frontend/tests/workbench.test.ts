import { describe, expect, it } from "vitest";

import { renderWorkbench } from "../src/render";
import { WorkbenchController } from "../src/workbench";
import { FakeService } from "./fakeService";

async function started(service: FakeService): Promise<WorkbenchController> {
  const controller = new WorkbenchController(service, {
    windowMin: 0,
    windowMax: 30,
    mode: "blend",
    hops: 1,
  });
  await controller.start();
  return controller;
}

describe("workbench controller", () => {
  it("loads the query queue camera by camera", async () => {
    const service = new FakeService(2);
    const controller = await started(service);
    expect(controller.state.query?.uid).toBe("c000:1");
    expect(controller.state.queryQueue.length).toBe(5); // 6 total, 1 active
    expect(controller.state.candidates.length).toBeGreaterThan(0);
  });

  it("shows an explicit empty state when no candidates fit the window", async () => {
    const service = new FakeService(1, ["c000"]); // single camera: no gallery
    const controller = await started(service);
    expect(controller.state.emptyList).toBe(true);
    const view = renderWorkbench(controller.state, controller.viewers.list());
    expect(view.emptyListMessage).toMatch(/No candidates/);
  });

  it("accepting a match refreshes tokens and advances to the next query", async () => {
    const service = new FakeService(2);
    const controller = await started(service);
    const query = controller.state.query!.uid;
    const top = controller.state.candidates[0].uid;

    await controller.handleKey("a");

    expect(controller.state.acceptedPairs).toEqual([[query, top]]);
    expect(controller.state.versionTokens.get(query)).toBe(1);
    expect(controller.state.versionTokens.get(top)).toBe(1);
    expect(controller.state.query?.uid).toBe("c000:2");
  });

  it("a matched candidate disappears from later lists for that query", async () => {
    const service = new FakeService(2);
    const controller = await started(service);
    const query = controller.state.query!.uid;
    const top = controller.state.candidates[0].uid;
    await controller.acceptSelected();

    await controller.setQuery(query);
    expect(controller.state.candidates.map((c) => c.uid)).not.toContain(top);
  });

  it("a forced 409 raises the conflict prompt without local mutation", async () => {
    const service = new FakeService(2);
    const controller = await started(service);
    const before = service.partition();
    service.failNextSubmit = "conflict";

    await controller.acceptSelected();

    expect(controller.state.conflict).not.toBeNull();
    expect(controller.state.conflict!.currentVersion).toBe(7);
    expect(controller.state.acceptedPairs).toEqual([]);
    expect(service.partition()).toEqual(before); // nothing marked matched
    // prompt shows newer state: query refetched, still the active query
    expect(controller.state.query?.uid).toBe("c000:1");
    const view = renderWorkbench(controller.state, controller.viewers.list());
    expect(view.conflict).not.toBeNull();
  });

  it("a network failure shows a retryable banner and mutates nothing", async () => {
    const service = new FakeService(2);
    const controller = await started(service);
    service.failNextSubmit = "network";

    await controller.acceptSelected();

    expect(controller.state.banner?.canRetry).toBe(true);
    expect(controller.state.acceptedPairs).toEqual([]);
    expect(service.partition().size).toBe(0);
    // retrying the same key now succeeds; no state was half-applied
    await controller.handleKey("a");
    expect(controller.state.acceptedPairs.length).toBe(1);
  });

  it("keyboard-only session completes a 5-vehicle scenario", async () => {
    const service = new FakeService(5);
    const controller = await started(service);

    let guard = 0;
    while (!controller.state.done && guard++ < 100) {
      const top = controller.state.candidates[0];
      if (top && top.appearance_distance < 0.5) {
        await controller.handleKey("a"); // accept
      } else {
        await controller.handleKey("n"); // skip
      }
    }

    expect(controller.state.done).toBe(true);
    expect(controller.state.acceptedPairs.length).toBe(10); // 5 vehicles x 2 joins
    expect(service.partition()).toEqual(
      new Set(
        [1, 2, 3, 4, 5].map((v) => [`c000:${v}`, `c001:${v}`, `c002:${v}`].join("+"))
      )
    );
  });

  it("selection keys move within the list and o opens clips up to four", async () => {
    const service = new FakeService(5);
    const controller = await started(service);
    for (let i = 0; i < 5; i++) {
      await controller.handleKey("o");
      await controller.handleKey("j");
    }
    expect(controller.viewers.size).toBe(4);
    await controller.handleKey("k");
    expect(controller.state.selectedIndex).toBeGreaterThanOrEqual(0);
  });
});
