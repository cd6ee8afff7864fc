// Assessment flow: start screen -> one screen per item -> completion.
// The server is authoritative for all state; this component only renders
// the current item and pushes acknowledged ratings forward.

import { ApiError, Client, SessionStart, StepResponse, WorkerItem } from "./api.js";

export interface AppOptions {
  retryDelayMs?: number;
  maxRetries?: number;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class AssessmentApp {
  private sessionId = "";
  private workerId = "";
  private retryDelayMs: number;
  private maxRetries: number;

  constructor(private root: HTMLElement, private client: Client,
              options: AppOptions = {}) {
    this.retryDelayMs = options.retryDelayMs ?? 1000;
    this.maxRetries = options.maxRetries ?? 5;
  }

  renderStart(notice = ""): void {
    this.root.innerHTML = `
      <div class="screen start-screen">
        ${notice ? `<p class="notice">${escapeHtml(notice)}</p>` : ""}
        <h1>Video caption assessment</h1>
        <p>You will watch short clips and rate how well a caption describes
           each one, from 0 (not at all) to 100 (perfectly).</p>
        <form id="start-form">
          <label>Worker ID
            <input type="text" id="worker-id" autocomplete="off" required>
          </label>
          <button type="submit">Begin</button>
        </form>
      </div>`;
    const form = this.root.querySelector<HTMLFormElement>("#start-form")!;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const input = this.root.querySelector<HTMLInputElement>("#worker-id")!;
      if (input.value.trim()) {
        void this.start(input.value.trim());
      }
    });
  }

  async start(workerId: string): Promise<void> {
    this.workerId = workerId;
    let session: SessionStart;
    try {
      session = await this.client.startSession(workerId);
    } catch (error) {
      if (error instanceof ApiError && error.code === "collection-complete") {
        this.renderMessage("All assessment batches are complete. Thank you!");
      } else {
        this.renderMessage(`Could not start a session: ${reason(error)}`);
      }
      return;
    }
    this.sessionId = session.session_id;
    this.renderStep(session);
  }

  private renderStep(step: StepResponse): void {
    if (step.done) {
      this.renderDone(step);
    } else if (step.item) {
      this.renderItem(step.item);
    } else {
      this.renderMessage("Unexpected server response.");
    }
  }

  private renderItem(item: WorkerItem): void {
    this.root.innerHTML = `
      <div class="screen item-screen">
        <div class="progress">Caption ${item.position} of ${item.total}</div>
        <video id="clip" src="${escapeAttr(item.video_url)}" controls
               preload="auto"></video>
        <p class="caption">${escapeHtml(item.caption)}</p>
        <p class="instruction">Watch the whole clip, then rate how well the
           caption describes it.</p>
        <div class="rating-row">
          <span>0</span>
          <input type="range" id="score" min="0" max="100" step="1" value="50"
                 aria-label="caption quality from 0 to 100">
          <span>100</span>
        </div>
        <div class="slider-value" id="score-value">&ndash;</div>
        <button id="submit" disabled>Submit rating</button>
        <button id="skip" class="hidden">Video will not play &ndash; skip</button>
        <div id="banner" class="banner hidden"></div>
      </div>`;

    const video = this.root.querySelector<HTMLVideoElement>("#clip")!;
    const slider = this.root.querySelector<HTMLInputElement>("#score")!;
    const valueLabel = this.root.querySelector<HTMLElement>("#score-value")!;
    const submit = this.root.querySelector<HTMLButtonElement>("#submit")!;
    const skip = this.root.querySelector<HTMLButtonElement>("#skip")!;

    // submission unlocks only after the clip played through once and the
    // slider was deliberately touched (the midpoint is not a default vote)
    let played = false;
    let touched = false;
    const unlock = () => {
      submit.disabled = !(played && touched);
    };
    video.addEventListener("ended", () => {
      played = true;
      unlock();
    });
    video.addEventListener("error", () => {
      skip.classList.remove("hidden");
    });
    slider.addEventListener("input", () => {
      touched = true;
      valueLabel.textContent = slider.value;
      unlock();
    });

    submit.addEventListener("click", () => {
      if (submit.disabled) {
        return;
      }
      submit.disabled = true;
      void this.push(() => this.client.submitRating(
        this.sessionId, item.item_id, parseInt(slider.value, 10)));
    });
    skip.addEventListener("click", () => {
      skip.disabled = true;
      void this.push(() => this.client.skipItem(this.sessionId, item.item_id));
    });
  }

  // Send one rating (or skip) with retries; the server's idempotent replay
  // makes resubmission after a lost response safe.
  private async push(send: () => Promise<StepResponse>): Promise<void> {
    for (let attempt = 0; ; attempt++) {
      try {
        const step = await send();
        this.hideBanner();
        this.renderStep(step);
        return;
      } catch (error) {
        if (error instanceof ApiError && error.status < 500) {
          if (error.code === "session-expired" || error.code === "unknown-session") {
            this.renderStart("Your session expired; please start again. "
              + "Already-submitted ratings were kept.");
          } else {
            this.showBanner(`The server rejected the submission: ${error.message}`);
            const submit = this.root.querySelector<HTMLButtonElement>("#submit");
            if (submit) submit.disabled = false;
          }
          return;
        }
        // network failures and transient 5xx responses: the server's
        // idempotent replay makes resubmitting the same rating safe
        if (attempt >= this.maxRetries) {
          this.showBanner("Still offline. Check your connection; "
            + "the rating was not recorded.");
          const submit = this.root.querySelector<HTMLButtonElement>("#submit");
          if (submit) submit.disabled = false;
          return;
        }
        this.showBanner("Connection lost; retrying…");
        await sleep(this.retryDelayMs);
      }
    }
  }

  private renderDone(step: StepResponse): void {
    const count = step.summary?.count ?? 0;
    this.root.innerHTML = `
      <div class="screen done-screen">
        <h1>All done &ndash; thank you!</h1>
        <p>You rated ${count} captions in this batch.</p>
        <button id="another">Assess another batch</button>
      </div>`;
    this.root.querySelector<HTMLButtonElement>("#another")!
      .addEventListener("click", () => void this.start(this.workerId));
  }

  private renderMessage(text: string): void {
    this.root.innerHTML = `
      <div class="screen message-screen">
        <p>${escapeHtml(text)}</p>
        <button id="back">Back to start</button>
      </div>`;
    this.root.querySelector<HTMLButtonElement>("#back")!
      .addEventListener("click", () => this.renderStart());
  }

  private showBanner(text: string): void {
    const banner = this.root.querySelector<HTMLElement>("#banner");
    if (banner) {
      banner.textContent = text;
      banner.classList.remove("hidden");
    }
  }

  private hideBanner(): void {
    const banner = this.root.querySelector<HTMLElement>("#banner");
    if (banner) {
      banner.classList.add("hidden");
    }
  }
}

function reason(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => ({
    "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;",
  }[ch]!));
}

function escapeAttr(text: string): string {
  return escapeHtml(text);
}
