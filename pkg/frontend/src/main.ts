// Browser bootstrap: wires the controller to a three-panel layout
// (clips left, camera map upper right, recommendation list lower right).

import { ApiClient } from "./api";
import { drawOverlay, syncCanvasToVideo, viewForSize } from "./overlay";
import { renderWorkbench } from "./render";
import { WorkbenchController } from "./workbench";

export function mountWorkbench(root: HTMLElement, baseUrl: string): WorkbenchController {
  const api = new ApiClient(baseUrl);
  const controller = new WorkbenchController(api);

  root.innerHTML = `
    <div class="wb" style="display:flex;gap:12px;font-family:sans-serif">
      <div id="wb-clips" style="flex:3;display:grid;grid-template-columns:1fr 1fr;gap:8px"></div>
      <div style="flex:2;display:flex;flex-direction:column;gap:12px">
        <svg id="wb-map" width="360" height="240" style="background:#f2f2f2"></svg>
        <div id="wb-status"></div>
        <table id="wb-list" style="border-collapse:collapse;width:100%"></table>
      </div>
    </div>`;
  const clips = root.querySelector("#wb-clips") as HTMLElement;
  const map = root.querySelector("#wb-map") as SVGSVGElement;
  const list = root.querySelector("#wb-list") as HTMLTableElement;
  const status = root.querySelector("#wb-status") as HTMLElement;

  function redraw(): void {
    const view = renderWorkbench(controller.state, controller.viewers.list());

    map.innerHTML = view.map
      .map(
        (n) =>
          `<circle cx="${n.x}" cy="${n.y}" r="${n.highlighted ? 9 : 6}"
             fill="${n.highlighted ? "#e5484d" : "#4263eb"}"></circle>
           <text x="${n.x + 10}" y="${n.y + 4}" font-size="11">${n.cameraId}</text>`
      )
      .join("");

    const header =
      "<tr><th align=left>candidate</th><th>camera</th><th>d</th><th>appearance</th></tr>";
    list.innerHTML =
      header +
      view.rows
        .map(
          (r) =>
            `<tr style="background:${r.selected ? "#dbe4ff" : "transparent"}">
               <td>${r.uid}</td><td>${r.cameraId}</td>
               <td align=right>${r.offsetLabel}</td>
               <td align=right>${r.appearanceLabel}</td></tr>`
        )
        .join("");

    const parts: string[] = [];
    if (view.queryLabel) parts.push(`query <b>${view.queryLabel}</b>`);
    parts.push(`${view.accepted} matched, ${view.remaining} queued`);
    if (view.emptyListMessage) parts.push(`<i>${view.emptyListMessage}</i>`);
    if (view.banner) parts.push(`<span style="color:#b42318">${view.banner.text}</span>`);
    if (view.conflict) {
      parts.push(
        `<span style="color:#b54708">Someone else changed this record
         (now at version ${view.conflict.currentVersion}) - review and retry.</span>`
      );
    }
    if (view.done) parts.push("<b>all queries reviewed</b>");
    status.innerHTML = parts.join(" &middot; ");

    clips.innerHTML = "";
    for (const viewer of controller.viewers.list()) {
      const cell = document.createElement("div");
      cell.style.position = "relative";
      const video = document.createElement("video");
      video.src = viewer.clipUri;
      video.controls = true;
      video.muted = true;
      video.style.width = "100%";
      const canvas = document.createElement("canvas");
      canvas.style.cssText = "position:absolute;left:0;top:0;pointer-events:none";
      cell.append(video, canvas);
      clips.append(cell);

      const payload = viewer.payload;
      const repaint = () => {
        syncCanvasToVideo(canvas, video);
        const ctx = canvas.getContext("2d");
        if (!ctx) return;
        const view2 = viewForSize(
          video.videoWidth || canvas.width,
          video.videoHeight || canvas.height,
          canvas.width,
          canvas.height
        );
        drawOverlay(ctx, payload, video.currentTime, view2);
        if (!video.paused) requestAnimationFrame(repaint);
      };
      video.addEventListener("timeupdate", repaint);
      video.addEventListener("play", repaint);
    }
  }

  document.addEventListener("keydown", (ev) => {
    void controller.handleKey(ev.key).then(redraw);
  });

  void controller.start().then(redraw);
  return controller;
}
