import { beforeEach, describe, expect, it } from "vitest";

import { mount } from "../src/widget";
import { fixturePage, flush, mockService } from "./helpers";

function mountFixture(service = mockService()) {
  const root = fixturePage();
  const handle = mount({
    serviceUrl: "http://service.test",
    chapterId: "efficient-ai",
    root,
    fetchImpl: service.fetchImpl,
    storage: window.localStorage,
  });
  return { root, handle, service };
}

beforeEach(() => {
  window.localStorage.clear();
  document.body.innerHTML = "";
});

describe("mount", () => {
  it("injects one quiz trigger per section", () => {
    const { handle, root } = mountFixture();
    expect(handle.triggers).toHaveLength(3);
    const ids = handle.triggers.map((t) => t.dataset.sectionId);
    expect(ids).toEqual(["efficient-ai:s000", "efficient-ai:s001", "efficient-ai:s002"]);
    expect(root.querySelectorAll("[data-sk-trigger]")).toHaveLength(3);
  });

  it("is idempotent across repeated mounts", () => {
    const { root, service } = mountFixture();
    mount({
      serviceUrl: "http://service.test",
      chapterId: "efficient-ai",
      root,
      fetchImpl: service.fetchImpl,
      storage: window.localStorage,
    });
    expect(root.querySelectorAll("[data-sk-trigger]")).toHaveLength(3);
    expect(document.querySelectorAll("[data-sk-panel-host]")).toHaveLength(1);
  });

  it("keeps widget styles inside the shadow root", () => {
    const { handle } = mountFixture();
    expect(handle.shadowRoot.querySelector("style")).not.toBeNull();
    // No widget stylesheet leaks into the host document.
    expect(document.head.querySelectorAll("style")).toHaveLength(0);
    expect(document.body.querySelectorAll(":scope > style")).toHaveLength(0);
    // Host content untouched apart from the trigger buttons.
    expect(document.querySelectorAll("article p")).toHaveLength(3);
  });

  it("shows a banner and stays readable when the service is down", async () => {
    const service = mockService();
    service.failAll = true;
    const { handle } = mountFixture(service);
    handle.triggers[0].click();
    await flush();
    const banner = handle.shadowRoot.querySelector(".sk-banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toMatch(/page stays readable/);
    expect(document.querySelectorAll("article p")).toHaveLength(3);
  });

  it("disables a trigger while its quiz request is in flight", async () => {
    const { handle } = mountFixture();
    const trigger = handle.triggers[1];
    trigger.click();
    expect(trigger.disabled).toBe(true);
    await flush();
    expect(trigger.disabled).toBe(false);
  });
});

describe("requests", () => {
  it("sends the slider difficulty in quiz and explain payloads", async () => {
    const { handle, service } = mountFixture();
    const slider = handle.shadowRoot.querySelector<HTMLInputElement>("input[type=range]")!;
    slider.value = "3"; // Expert
    slider.dispatchEvent(new Event("input"));

    handle.triggers[0].click();
    await flush();
    const quizRequest = service.requests.find((r) => r.path === "/quiz");
    expect(quizRequest?.body.difficulty).toBe("Expert");
    expect(quizRequest?.body.section_id).toBe("efficient-ai:s000");
    expect(typeof quizRequest?.body.learner_id).toBe("string");

    const selection = window.getSelection()!;
    const range = document.createRange();
    range.selectNodeContents(document.querySelector("article p")!);
    selection.removeAllRanges();
    selection.addRange(range);
    document.dispatchEvent(new Event("mouseup"));
    const ask = handle.shadowRoot.querySelector<HTMLButtonElement>(".sk-explain-ask")!;
    ask.click();
    await flush();
    const explainRequest = service.requests.find((r) => r.path === "/explain");
    expect(explainRequest?.body.difficulty).toBe("Expert");
    expect(explainRequest?.body.chapter_id).toBe("efficient-ai");
  });

  it("persists the difficulty preference across mounts", () => {
    const { handle } = mountFixture();
    const slider = handle.shadowRoot.querySelector<HTMLInputElement>("input[type=range]")!;
    slider.value = "2";
    slider.dispatchEvent(new Event("input"));
    expect(handle.session.difficulty).toBe("Advanced");

    const again = mountFixture(); // fresh DOM, same localStorage
    expect(again.handle.session.difficulty).toBe("Advanced");
    expect(again.handle.session.learnerId).toBe(handle.session.learnerId);
  });

  it("renders explanation with source citations", async () => {
    const { handle } = mountFixture();
    const selection = window.getSelection()!;
    const range = document.createRange();
    range.selectNodeContents(document.querySelector("article p")!);
    selection.removeAllRanges();
    selection.addRange(range);
    document.dispatchEvent(new Event("mouseup"));
    handle.shadowRoot.querySelector<HTMLButtonElement>(".sk-explain-ask")!.click();
    await flush();
    const sources = handle.shadowRoot.querySelector(".sk-sources");
    expect(sources?.textContent).toContain("ch:s000:p000");
  });
});
