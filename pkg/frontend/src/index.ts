import { mount } from "./widget";

export { mount } from "./widget";
export { WidgetSession } from "./session";
export { ServiceClient, ServiceError } from "./client";
export { renderQuiz } from "./quizView";
export { renderDashboard, renderGraph } from "./dashboard";
export * from "./types";

// When bundled and dropped into a page, auto-mount from the script tag:
//   <script src="studykit-widget.js"
//           data-service-url="http://localhost:8080"
//           data-chapter-id="efficient-ai"></script>
const current = typeof document !== "undefined" ? document.currentScript : null;
if (current instanceof HTMLScriptElement && current.dataset.serviceUrl) {
  const start = () =>
    mount({
      serviceUrl: current.dataset.serviceUrl!,
      chapterId: current.dataset.chapterId ?? "chapter",
    });
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", start, { once: true });
  } else {
    start();
  }
}
