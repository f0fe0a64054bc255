/** Single-page participant flow: extrapolation trials, then ranking trials. */

import { ApiClient, type OccamTask, type Stimulus } from "./api.js";
import { TrialState, validateYStar, type TrialDraft } from "./trial.js";
import { RankingState } from "./ranking.js";
import { extent, makeScale, polylinePoints, svgEl, type PlotBox } from "./plot.js";

const BOX: PlotBox = { width: 640, height: 420, margin: 40 };

function draftKey(participantId: string, stimulusId: string): string {
  return `hk-draft:${participantId}:${stimulusId}`;
}

function loadDraft(key: string): TrialDraft | null {
  try {
    const raw = localStorage.getItem(key);
    return raw ? (JSON.parse(raw) as TrialDraft) : null;
  } catch {
    return null;
  }
}

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function showBanner(message: string | null): void {
  const banner = el("banner");
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

function participantIdFromUrl(): string | null {
  const pid = new URLSearchParams(window.location.search).get("pid");
  return pid && pid.trim().length > 0 ? pid.trim() : null;
}

/** Renders one extrapolation trial and resolves once the submission is accepted. */
function runExtrapolationTrial(
  client: ApiClient,
  participantId: string,
  stimulus: Stimulus,
): Promise<void> {
  return new Promise((resolve) => {
    const stage = el("stage");
    stage.innerHTML = "";
    el("title").textContent = "Extrapolate the function";
    el("instructions").textContent =
      "Drag each open marker up or down to where you think the function " +
      "continues. Submit unlocks once every marker is placed.";

    const trial = new TrialState(stimulus);
    const key = draftKey(participantId, stimulus.id);
    const draft = loadDraft(key);
    if (draft) trial.restoreDraft(draft);

    const allY = [...stimulus.y_train];
    const yDomain: [number, number] = stimulus.y_range ?? extent(allY, 0.8);
    const xDomain = extent([...stimulus.X_train, ...stimulus.X_test], 0.05);
    const scale = makeScale(xDomain, yDomain, BOX);

    const svg = svgEl("svg", {
      width: BOX.width,
      height: BOX.height,
      viewBox: `0 0 ${BOX.width} ${BOX.height}`,
    });
    svg.classList.add("plot");
    stage.appendChild(svg);

    // Fixed training points.
    for (let i = 0; i < stimulus.X_train.length; i++) {
      svg.appendChild(
        svgEl("circle", {
          cx: scale.toPxX(stimulus.X_train[i]),
          cy: scale.toPxY(stimulus.y_train[i]),
          r: 4,
          class: "train-point",
        }),
      );
    }

    const preview = svgEl("polyline", { class: "preview", points: "" });
    svg.appendChild(preview);

    const midY = (yDomain[0] + yDomain[1]) / 2;
    const markers: SVGCircleElement[] = [];

    const submitBtn = document.createElement("button");
    submitBtn.textContent = "Submit";
    submitBtn.disabled = true;

    function refresh(): void {
      const xs: number[] = [];
      const ys: number[] = [];
      for (let i = 0; i < stimulus.X_test.length; i++) {
        const y = trial.markerAt(i);
        markers[i].classList.toggle("placed", y !== null);
        if (y !== null) {
          markers[i].setAttribute("cy", String(scale.toPxY(y)));
          xs.push(stimulus.X_test[i]);
          ys.push(y);
        }
      }
      preview.setAttribute("points", polylinePoints(xs, ys, scale));
      submitBtn.disabled = !trial.canSubmit();
      localStorage.setItem(key, JSON.stringify(trial.toDraft()));
    }

    let dragging: number | null = null;
    for (let i = 0; i < stimulus.X_test.length; i++) {
      const marker = svgEl("circle", {
        cx: scale.toPxX(stimulus.X_test[i]),
        cy: scale.toPxY(trial.markerAt(i) ?? midY),
        r: 7,
        class: "marker",
        "data-index": i,
      });
      marker.addEventListener("pointerdown", (ev) => {
        dragging = i;
        marker.setPointerCapture(ev.pointerId);
      });
      markers.push(marker);
      svg.appendChild(marker);
    }

    svg.addEventListener("pointermove", (ev) => {
      if (dragging === null) return;
      const rect = svg.getBoundingClientRect();
      const py = ((ev.clientY - rect.top) / rect.height) * BOX.height;
      const y = Math.min(yDomain[1], Math.max(yDomain[0], scale.fromPxY(py)));
      trial.placeMarker(dragging, y);
      refresh();
    });
    svg.addEventListener("pointerup", () => {
      dragging = null;
    });

    submitBtn.addEventListener("click", async () => {
      const yStar = trial.yStar();
      const problem = validateYStar(yStar, stimulus.X_test.length);
      if (problem) {
        showBanner(`Cannot submit: ${problem}`);
        return;
      }
      submitBtn.disabled = true;
      try {
        await client.submitResponse({
          participant_id: participantId,
          stimulus_id: stimulus.id,
          y_star: yStar,
          response_time_s: trial.elapsedSeconds(),
        });
        trial.markSubmitted();
        localStorage.removeItem(key);
        showBanner(null);
        resolve();
      } catch (err) {
        // Draft stays in localStorage; the participant can retry.
        showBanner(`Submission failed (${String(err)}). Your markers are saved — retry.`);
        submitBtn.disabled = !trial.canSubmit();
      }
    });
    stage.appendChild(submitBtn);

    trial.markRendered();
    refresh();
  });
}

/** Renders one ranking trial and resolves once the submission is accepted. */
function runRankingTrial(
  client: ApiClient,
  participantId: string,
  task: OccamTask,
): Promise<void> {
  return new Promise((resolve) => {
    const stage = el("stage");
    stage.innerHTML = "";
    el("title").textContent = "Rank the candidate fits";
    el("instructions").textContent =
      "Drag the cards so the curve most likely to have generated the data " +
      "is at the top, down to the least likely at the bottom.";

    const state = new RankingState(task);
    const yDomain = extent([...task.y, ...task.curves.flatMap((c) => c.curve)], 0.1);
    const xDomain = extent([...task.X, ...task.display_grid], 0.05);
    const cardBox: PlotBox = { width: 280, height: 140, margin: 16 };
    const scale = makeScale(xDomain, yDomain, cardBox);

    const list = document.createElement("ol");
    list.className = "card-list";
    stage.appendChild(list);

    const submitBtn = document.createElement("button");
    submitBtn.textContent = "Submit ranking";

    function cardSvg(curve: number[]): SVGSVGElement {
      const svg = svgEl("svg", {
        width: cardBox.width,
        height: cardBox.height,
        viewBox: `0 0 ${cardBox.width} ${cardBox.height}`,
      });
      svg.appendChild(
        svgEl("polyline", {
          class: "candidate",
          points: polylinePoints(task.display_grid, curve, scale),
        }),
      );
      for (let i = 0; i < task.X.length; i++) {
        svg.appendChild(
          svgEl("circle", {
            cx: scale.toPxX(task.X[i]),
            cy: scale.toPxY(task.y[i]),
            r: 3,
            class: "train-point",
          }),
        );
      }
      return svg;
    }

    let dragFrom: number | null = null;

    function refresh(): void {
      list.innerHTML = "";
      state.order().forEach((_, index) => {
        const item = document.createElement("li");
        item.className = "card";
        item.draggable = true;
        item.appendChild(cardSvg(state.curveForCard(index)));
        item.addEventListener("dragstart", () => {
          dragFrom = index;
        });
        item.addEventListener("dragover", (ev) => ev.preventDefault());
        item.addEventListener("drop", (ev) => {
          ev.preventDefault();
          if (dragFrom !== null && dragFrom !== index) {
            state.move(dragFrom, index);
            refresh();
          }
          dragFrom = null;
        });
        list.appendChild(item);
      });
      submitBtn.disabled = !state.canSubmit();
    }

    const question = document.createElement("p");
    question.textContent =
      "Is the curve you ranked first likely to have generated the data?";
    stage.appendChild(question);
    for (const answer of ["likely", "unlikely"]) {
      const label = document.createElement("label");
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = "plausibility";
      radio.value = answer;
      radio.addEventListener("change", () => {
        state.plausibilityAnswer = answer;
        refresh();
      });
      label.append(radio, ` ${answer} `);
      stage.appendChild(label);
    }

    submitBtn.addEventListener("click", async () => {
      submitBtn.disabled = true;
      try {
        await client.submitRanking({
          participant_id: participantId,
          task_id: task.task_id,
          shuffle_token: task.shuffle_token,
          order: state.order(),
          plausibility_answer: state.plausibilityAnswer,
        });
        state.markSubmitted();
        showBanner(null);
        resolve();
      } catch (err) {
        showBanner(`Submission failed (${String(err)}). Retry.`);
        submitBtn.disabled = !state.canSubmit();
      }
    });
    stage.appendChild(submitBtn);
    refresh();
  });
}

async function runStudy(client: ApiClient, participantId: string): Promise<void> {
  for (;;) {
    const item = await client.next(participantId);
    if (item.done || !item.kind || !item.id) {
      el("title").textContent = "All done";
      el("instructions").textContent = "Thank you for participating.";
      el("stage").innerHTML = "";
      return;
    }
    if (item.kind === "stimulus") {
      const stimulus = await client.stimulus(item.id);
      await runExtrapolationTrial(client, participantId, stimulus);
    } else {
      const task = await client.occamTask(item.id, participantId);
      await runRankingTrial(client, participantId, task);
    }
  }
}

export function start(baseUrl: string = ""): void {
  const client = new ApiClient(baseUrl || window.location.origin);
  const entry = el("entry") as HTMLFormElement;
  const pidInput = el("pid-input") as HTMLInputElement;

  const begin = (pid: string) => {
    entry.style.display = "none";
    runStudy(client, pid).catch((err) => showBanner(String(err)));
  };

  const fromUrl = participantIdFromUrl();
  if (fromUrl) {
    begin(fromUrl);
    return;
  }
  entry.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const pid = pidInput.value.trim();
    if (pid) begin(pid);
  });
}

if (typeof document !== "undefined" && document.getElementById("entry")) {
  start();
}
