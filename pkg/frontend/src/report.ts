// Session report dashboard. Every figure from the report document is
// rendered into a span tagged with its JSON path, verbatim via
// String(), so the page can be checked against GET .../report field by
// field. Cohort histograms are rendered from a pasted cohort document;
// those counts come from a file, not the report, so they carry no path
// tags.

import type {
  FluencyNumbers,
  ParamVector,
  Report,
  SessionConfigDoc,
} from "./api.js";
import { el } from "./dom.js";
import { aspectDetail } from "./words.js";

const METRIC_LABELS: Record<string, string> = {
  r_idle: "robot idle share",
  h_idle: "human idle share",
  c_act: "working together",
  f_del: "delay at the handoff",
};

function num(doc: Document, path: string, value: unknown): HTMLSpanElement {
  return el(doc, "span", { class: "figure", "data-report-path": path }, [
    String(value),
  ]);
}

function ratioBar(doc: Document, value: number): HTMLElement {
  const pct = Math.max(0, Math.min(100, value * 100));
  const fill = el(doc, "div", { class: "bar-fill" });
  fill.style.width = `${pct}%`;
  return el(doc, "div", { class: "bar" }, [fill]);
}

function gaugeRow(
  doc: Document,
  spec: SessionConfigDoc["specs"][number],
  tuned: ParamVector,
): HTMLElement {
  const value = tuned[spec.name];
  const lo = Number(spec.min);
  const hi = Number(spec.max);
  const frac = hi > lo ? (Number(value) - lo) / (hi - lo) : 0;
  const mark = el(doc, "div", { class: "gauge-mark" });
  mark.style.left = `${Math.max(0, Math.min(100, frac * 100))}%`;
  const unit = spec.unit ? ` ${spec.unit}` : "";
  return el(doc, "div", { class: "gauge-row" }, [
    el(doc, "div", { class: "gauge-name" }, [
      el(doc, "strong", {}, [spec.name]),
      el(doc, "small", {}, [` ${aspectDetail(spec.name)}`]),
    ]),
    el(doc, "div", { class: "gauge-track" }, [mark]),
    el(doc, "div", { class: "gauge-value" }, [
      num(doc, `tuned.${spec.name}`, value),
      `${unit} (range ${spec.min} to ${spec.max})`,
    ]),
  ]);
}

function fluencyTable(
  doc: Document,
  before: FluencyNumbers,
  after: FluencyNumbers,
  delta: Record<string, number>,
): HTMLElement {
  const head = el(doc, "tr", {}, [
    el(doc, "th", {}, ["measure"]),
    el(doc, "th", {}, ["warm-up"]),
    el(doc, "th", {}, ["with your settings"]),
    el(doc, "th", {}, ["change"]),
  ]);
  const rows = Object.keys(METRIC_LABELS).map((key) => {
    const b = before[key as keyof FluencyNumbers] as number;
    const a = after[key as keyof FluencyNumbers] as number;
    return el(doc, "tr", {}, [
      el(doc, "td", {}, [METRIC_LABELS[key]]),
      el(doc, "td", {}, [num(doc, `fluency.practice1.${key}`, b), ratioBar(doc, b)]),
      el(doc, "td", {}, [num(doc, `fluency.practice2.${key}`, a), ratioBar(doc, a)]),
      el(doc, "td", {}, [num(doc, `fluency.delta.${key}`, delta[key])]),
    ]);
  });
  const timeRow = el(doc, "tr", {}, [
    el(doc, "td", {}, ["mean handover time (s)"]),
    el(doc, "td", {}, [num(doc, "fluency.practice1.total_time", before.total_time)]),
    el(doc, "td", {}, [num(doc, "fluency.practice2.total_time", after.total_time)]),
    el(doc, "td", {}, []),
  ]);
  return el(doc, "table", { class: "fluency" }, [head, ...rows, timeRow]);
}

export type Histograms = Record<string, Record<string, number>>;

/** Pull tuned-value histograms out of a pasted document. Accepts a
 * whole cohort file, its aggregates block, or the histogram map. */
export function extractHistograms(text: string): Histograms {
  const doc = JSON.parse(text);
  const hist = doc?.aggregates?.tuned_histograms ?? doc?.tuned_histograms ?? doc;
  if (typeof hist !== "object" || hist === null || Array.isArray(hist)) {
    throw new Error("no tuned_histograms found in the pasted document");
  }
  return hist as Histograms;
}

export function renderHistograms(
  doc: Document,
  container: HTMLElement,
  histograms: Histograms,
  mine: ParamVector | null,
): void {
  for (const [name, bins] of Object.entries(histograms)) {
    const keys = Object.keys(bins).sort((a, b) => Number(a) - Number(b));
    const maxCount = Math.max(1, ...keys.map((k) => bins[k]));
    const rows = keys.map((value) => {
      const isMine = mine !== null && mine[name] === value;
      const fill = el(doc, "div", {
        class: isMine ? "bar-fill mine" : "bar-fill",
      });
      fill.style.width = `${(bins[value] / maxCount) * 100}%`;
      return el(doc, "div", { class: "hist-row" }, [
        el(doc, "div", { class: "hist-value" }, [
          isMine ? `${value} (yours)` : value,
        ]),
        el(doc, "div", { class: "bar" }, [fill]),
        el(doc, "div", { class: "hist-count" }, [String(bins[value])]),
      ]);
    });
    container.append(
      el(doc, "div", { class: "hist" }, [
        el(doc, "h4", {}, [name]),
        ...rows,
      ]),
    );
  }
}

export function reportScreen(
  host: HTMLElement,
  doc: Document,
  report: Report,
  config: SessionConfigDoc,
): void {
  host.append(el(doc, "h2", {}, ["Your session report"]));

  if (report.tuned) {
    const tuned = report.tuned;
    host.append(
      el(doc, "h3", {}, ["Tuned settings"]),
      el(
        doc,
        "div",
        { class: "gauges" },
        config.specs.map((s) => gaugeRow(doc, s, tuned)),
      ),
    );
  }

  host.append(
    el(doc, "h3", {}, ["Effort"]),
    el(doc, "p", {}, [
      "You answered ",
      num(doc, "comparisons.total", report.comparisons.total),
      " comparisons across ",
      String(config.specs.length),
      " aspects; the robot ran ",
      num(doc, "handovers.total", report.handovers.total),
      " handovers, of which ",
      num(doc, "handovers.failed", report.handovers.failed),
      " failed (success rate ",
      num(doc, "handovers.success_rate", report.handovers.success_rate),
      ").",
    ]),
    el(
      doc,
      "ul",
      { class: "per-parameter" },
      Object.entries(report.comparisons.per_parameter).map(([name, count]) =>
        el(doc, "li", {}, [
          `${name}: `,
          num(doc, `comparisons.per_parameter.${name}`, count),
          " comparisons",
        ]),
      ),
    ),
  );

  const { practice1, practice2, delta } = report.fluency;
  if (practice1 && practice2 && delta) {
    host.append(
      el(doc, "h3", {}, ["Fluency, before and after"]),
      el(doc, "p", {}, [
        "Shares of the handover spent idle or working together, averaged over ",
        num(doc, "fluency.practice1.n", practice1.n),
        " warm-up and ",
        num(doc, "fluency.practice2.n", practice2.n),
        " tuned handovers.",
      ]),
      fluencyTable(doc, practice1, practice2, delta),
    );
  }

  if (report.evaluation) {
    const trials = Object.keys(report.evaluation.per_parameter).length;
    host.append(
      el(doc, "h3", {}, ["Could you tell yours apart?"]),
      el(doc, "p", {}, [
        "You picked your own settings in ",
        num(doc, "evaluation.total_correct", report.evaluation.total_correct),
        ` of ${trials} trials.`,
      ]),
      el(
        doc,
        "ul",
        { class: "eval-list" },
        Object.entries(report.evaluation.per_parameter).map(([name, hit]) =>
          el(doc, "li", {}, [
            `${name}: `,
            num(doc, `evaluation.per_parameter.${name}`, hit),
          ]),
        ),
      ),
    );
  }

  const input = el(doc, "textarea", {
    id: "cohort-input",
    rows: "4",
    placeholder: "Paste a cohort results file here",
  });
  const charts = el(doc, "div", { id: "cohort-charts" });
  const err = el(doc, "p", { class: "error", hidden: "" });
  const render = el(doc, "button", { id: "cohort-render" }, [
    "Show cohort histograms",
  ]);
  render.addEventListener("click", () => {
    err.hidden = true;
    while (charts.firstChild) charts.removeChild(charts.firstChild);
    try {
      renderHistograms(doc, charts, extractHistograms(input.value), report.tuned);
    } catch (exc) {
      err.hidden = false;
      err.textContent = `Could not read that: ${(exc as Error).message}`;
    }
  });
  host.append(
    el(doc, "h3", {}, ["How you compare to a cohort"]),
    el(doc, "p", {}, [
      "Paste the output of the cohort simulator to see where your ",
      "settings sit among other users.",
    ]),
    input,
    render,
    err,
    charts,
  );
}
