/**
 * DOM rendering: login -> labeling -> round-complete agreement view, plus
 * the facilitator adjudication screen. All persistence is server-side;
 * every screen rebuilds from API state, so a reload resumes at the first
 * unlabeled post.
 */

import { ApiClient, ApiError } from "./api.js";
import { Decision, LabelingSession, ValidationError, validateLabel } from "./session.js";

export const PROTECTED_CHARACTERISTICS = [
  "race", "ethnicity", "national origin", "disability",
  "religious affiliation", "caste", "sexual orientation", "sex",
  "gender identity", "serious disease",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

export class App {
  private session: LabelingSession | null = null;
  private role = "annotator";
  private round = 1;
  private keyHandler: ((event: KeyboardEvent) => void) | null = null;

  constructor(private readonly root: HTMLElement, private readonly api: ApiClient) {}

  start(): void {
    this.renderLogin();
  }

  private clear(): void {
    if (this.keyHandler) {
      document.removeEventListener("keydown", this.keyHandler);
      this.keyHandler = null;
    }
    this.root.replaceChildren();
  }

  private renderLogin(message = ""): void {
    this.clear();
    const form = el("form", { class: "login" });
    const title = el("h1", {}, "hatelab annotation");
    const who = el("input", { placeholder: "annotator id", autocomplete: "username" });
    const pass = el("input", { type: "password", placeholder: "passcode" });
    const roundInput = el("input", { type: "number", value: "1", min: "0" });
    const roundLabel = el("label", {}, "round ");
    roundLabel.append(roundInput);
    const button = el("button", { type: "submit" }, "sign in");
    const note = el("p", { class: "error" }, message);
    form.append(title, who, pass, roundLabel, button, note);
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      try {
        const login = await this.api.login(who.value.trim(), pass.value);
        this.role = login.role;
        this.round = Number(roundInput.value);
        if (this.role === "facilitator") {
          this.renderFacilitator();
        } else {
          this.session = new LabelingSession(this.api, this.round);
          await this.session.refresh();
          this.renderLabeling();
        }
      } catch (error) {
        note.textContent = error instanceof ApiError && error.status === 401
          ? "Wrong id or passcode."
          : `Login failed: ${error}`;
      }
    });
    this.root.append(form);
  }

  private renderLabeling(inlineError = ""): void {
    this.clear();
    const session = this.session!;
    if (session.roundComplete() || session.current() === null) {
      void this.renderAgreement();
      return;
    }
    const post = session.current()!;
    const { done, total } = session.progress;

    const container = el("div", { class: "labeling" });
    const progress = el("progress", { max: String(total), value: String(done) });
    const counter = el("p", { class: "counter" }, `${done} / ${total} labeled`);
    const text = el("blockquote", { class: "post-text", lang: "my" }, post.text);
    container.append(progress, counter, text);
    if (post.url) {
      const link = el("a", { href: post.url, target: "_blank", rel: "noopener" },
                      "open original post");
      container.append(link);
    }

    const picker = el("fieldset", { class: "characteristics" });
    picker.append(el("legend", {}, "protected characteristics (required for Yes)"));
    const boxes: HTMLInputElement[] = [];
    for (const characteristic of PROTECTED_CHARACTERISTICS) {
      const label = el("label", { class: "char-option" });
      const box = el("input", { type: "checkbox", value: characteristic });
      boxes.push(box);
      label.append(box, document.createTextNode(" " + characteristic));
      picker.append(label);
    }
    container.append(picker);

    const error = el("p", { class: "error" }, inlineError);
    const yes = el("button", { class: "yes" }, "Yes — hate speech (Y)");
    const no = el("button", { class: "no" }, "No (N)");
    const selected = () => boxes.filter((b) => b.checked).map((b) => b.value);
    const refreshEnabled = () => {
      yes.toggleAttribute("disabled", validateLabel("Yes", selected()) !== null);
    };
    boxes.forEach((b) => b.addEventListener("change", refreshEnabled));
    refreshEnabled();

    const submit = async (decision: Decision) => {
      const characteristics = decision === "Yes" ? selected() : [];
      try {
        await session.submit(decision, characteristics);
        this.renderLabeling();
      } catch (err) {
        if (err instanceof ValidationError) {
          error.textContent = err.message;
        } else if (err instanceof ApiError) {
          error.textContent = `Rejected (${err.status}): ${err.message}`;
        } else {
          error.textContent = `Submission failed, retrying is safe: ${err}`;
        }
      }
    };
    yes.addEventListener("click", () => void submit("Yes"));
    no.addEventListener("click", () => void submit("No"));
    this.keyHandler = (event) => {
      if (event.key === "y" || event.key === "Y") void submit("Yes");
      if (event.key === "n" || event.key === "N") void submit("No");
    };
    document.addEventListener("keydown", this.keyHandler);

    container.append(yes, no, error);
    this.root.append(container);
  }

  private async renderAgreement(): Promise<void> {
    this.clear();
    const session = this.session!;
    const container = el("div", { class: "agreement" });
    container.append(el("h1", {}, `Round ${session.round} complete`));
    const view = await session.agreementView();
    if (view.state === "waiting") {
      container.append(el("p", {}, "Waiting for your partner to finish this round…"));
      const check = el("button", {}, "check again");
      check.addEventListener("click", () => void this.renderAgreement());
      container.append(check);
    } else {
      const pct = (view.percentAgreement * 100).toFixed(1);
      container.append(el("p", { class: "score" }, `Agreement: ${pct}%`));
      container.append(el("h2", {}, `Disagreements to discuss (${view.disagreements.length})`));
      const list = el("ul");
      for (const d of view.disagreements) {
        list.append(el("li", {},
          `${d.post_id}: you said ${d.mine}, partner said ${d.partner}`));
      }
      container.append(list);
    }
    this.root.append(container);
  }

  private renderFacilitator(message = ""): void {
    this.clear();
    const container = el("div", { class: "facilitator" });
    container.append(el("h1", {}, "Facilitator adjudication"));
    const postId = el("input", { placeholder: "post id" });
    const decision = el("select");
    decision.append(el("option", { value: "Yes" }, "Yes"), el("option", { value: "No" }, "No"));
    const chars = el("input", { placeholder: "characteristics (semicolon separated)" });
    const save = el("button", {}, "record decision");
    const note = el("p", { class: "error" }, message);
    save.addEventListener("click", async () => {
      try {
        const characteristics = chars.value.split(";").map((c) => c.trim()).filter(Boolean);
        await this.api.adjudicate(postId.value.trim(), decision.value, characteristics);
        note.textContent = `Recorded ${postId.value.trim()}.`;
        postId.value = "";
        chars.value = "";
      } catch (error) {
        note.textContent = error instanceof ApiError
          ? `Rejected (${error.status}): ${error.message}`
          : `Failed: ${error}`;
      }
    });
    container.append(postId, decision, chars, save, note);

    const statsButton = el("button", {}, "characteristics histogram");
    const stats = el("pre", { class: "stats" });
    statsButton.addEventListener("click", async () => {
      const data = await this.api.characteristicsStats();
      stats.textContent = data.histogram
        .map((row) => `${row.characteristic}: ${row.count}`)
        .join("\n");
    });
    container.append(statsButton, stats);
    this.root.append(container);
  }
}
