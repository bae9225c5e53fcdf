/**
 * The four figure kinds, each a pure function of parsed run logs:
 *
 *   trajectories     - leader + follower x/y paths from one log
 *   tracking_errors  - e_x / e_y / e_theta time series per follower
 *   velocity_compare - commanded linear velocity, one panel per follower,
 *                      overlaying one trace per input log
 *   torque_compare   - left-wheel torque, same layout as velocity_compare
 *
 * No metric is computed here; numeric summaries live in the simulator's
 * metrics.json.
 */

import { Column, RunLog, series } from "./csv.js";
import { PALETTE, PanelSpec, renderFigure, Trace } from "./svg.js";

export const KINDS = ["trajectories", "tracking_errors", "velocity_compare", "torque_compare"] as const;
export type Kind = (typeof KINDS)[number];

function followerIds(log: RunLog): number[] {
  return [...log.followers.keys()].sort((a, b) => a - b);
}

export function trajectoriesFigure(log: RunLog, label = "run"): string {
  const traces: Trace[] = [
    {
      label: "leader",
      xs: series(log.leader, "x", label),
      ys: series(log.leader, "y", label),
      color: "#000000",
      dash: "6 4",
      width: 2,
    },
  ];
  followerIds(log).forEach((id, i) => {
    const rows = log.followers.get(id)!;
    traces.push({
      label: `follower ${id}`,
      xs: series(rows, "x", label),
      ys: series(rows, "y", label),
      color: PALETTE[i % PALETTE.length],
    });
  });
  const panel: PanelSpec = {
    title: "Robot trajectories",
    xLabel: "x [m]",
    yLabel: "y [m]",
    traces,
    equalAspect: true,
  };
  return renderFigure([panel], 1);
}

export function trackingErrorsFigure(log: RunLog, label = "run"): string {
  const axes: { column: Column; title: string; yLabel: string }[] = [
    { column: "e_x", title: "Tracking error x", yLabel: "e_x [m]" },
    { column: "e_y", title: "Tracking error y", yLabel: "e_y [m]" },
    { column: "e_theta", title: "Tracking error heading", yLabel: "e_theta [rad]" },
  ];
  const panels = axes.map(({ column, title, yLabel }): PanelSpec => {
    const traces = followerIds(log).map((id, i): Trace => {
      const rows = log.followers.get(id)!;
      return {
        label: `follower ${id}`,
        xs: rows.map((r) => r.t),
        ys: series(rows, column, label),
        color: PALETTE[i % PALETTE.length],
      };
    });
    return { title, xLabel: "t [s]", yLabel, traces };
  });
  return renderFigure(panels, 1);
}

function perFollowerComparison(
  logs: RunLog[],
  labels: string[],
  column: Column,
  titlePrefix: string,
  yLabel: string,
): string {
  const ids = followerIds(logs[0]);
  for (const [i, log] of logs.entries()) {
    const have = followerIds(log);
    if (have.length !== ids.length || have.some((v, j) => v !== ids[j])) {
      throw new Error(`${labels[i]}: follower set differs between inputs`);
    }
  }
  const panels = ids.map((id): PanelSpec => {
    const traces = logs.map((log, i): Trace => {
      const rows = log.followers.get(id)!;
      return {
        label: labels[i],
        xs: rows.map((r) => r.t),
        ys: series(rows, column, labels[i]),
        color: PALETTE[i % PALETTE.length],
      };
    });
    return { title: `${titlePrefix}, follower ${id}`, xLabel: "t [s]", yLabel, traces };
  });
  return renderFigure(panels, 2);
}

export function velocityCompareFigure(logs: RunLog[], labels: string[]): string {
  return perFollowerComparison(logs, labels, "v_cmd", "Commanded linear velocity", "v_cmd [m/s]");
}

export function torqueCompareFigure(logs: RunLog[], labels: string[]): string {
  return perFollowerComparison(logs, labels, "tau_l", "Left wheel torque", "tau_l [N m]");
}

export function render(kind: Kind, logs: RunLog[], labels: string[]): string {
  if (logs.length === 0) throw new Error("at least one input CSV is required");
  switch (kind) {
    case "trajectories":
      return trajectoriesFigure(logs[0], labels[0]);
    case "tracking_errors":
      return trackingErrorsFigure(logs[0], labels[0]);
    case "velocity_compare":
      return velocityCompareFigure(logs, labels);
    case "torque_compare":
      return torqueCompareFigure(logs, labels);
  }
}
