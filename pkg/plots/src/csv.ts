/**
 * Engine CSV log parsing.
 *
 * The simulator writes one row per robot per tick; the leader uses
 * robot_id 0 with the measurement/filter/command/torque and error columns
 * empty. This module validates the schema and splits rows by robot.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";

export const REQUIRED_COLUMNS = [
  "t", "robot_id", "x", "y", "theta", "v_true", "omega_true",
  "v_meas", "omega_meas", "v_filt", "omega_filt", "v_cmd", "omega_cmd",
  "tau_l", "tau_r", "e_x", "e_y", "e_theta", "x_hat", "y_hat", "theta_hat",
] as const;

export type Column = (typeof REQUIRED_COLUMNS)[number];

/** One CSV row; leader rows carry null in the follower-only columns. */
export type Row = { t: number; robot_id: number } & {
  [K in Exclude<Column, "t" | "robot_id">]: number | null;
};

export interface RunLog {
  /** Rows of the leader (robot_id 0), in tick order. */
  leader: Row[];
  /** follower id (1-based) -> rows in tick order. */
  followers: Map<number, Row[]>;
}

export function parseRunCsv(text: string, name = "csv"): RunLog {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${name}: parse error at row ${first.row}: ${first.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!fields.includes(column)) {
      throw new Error(`${name}: missing column ${column}`);
    }
  }
  if (parsed.data.length === 0) {
    throw new Error(`${name}: empty CSV`);
  }

  const leader: Row[] = [];
  const followers = new Map<number, Row[]>();
  for (const raw of parsed.data) {
    const row = {} as Record<string, number | null>;
    for (const column of REQUIRED_COLUMNS) {
      const value = raw[column];
      row[column] = value === "" || value === undefined ? null : Number(value);
    }
    const typed = row as unknown as Row;
    if (typed.robot_id === 0) {
      leader.push(typed);
    } else {
      const bucket = followers.get(typed.robot_id);
      if (bucket === undefined) {
        followers.set(typed.robot_id, [typed]);
      } else {
        bucket.push(typed);
      }
    }
  }
  return { leader, followers };
}

export function loadRunCsv(path: string): RunLog {
  return parseRunCsv(readFileSync(path, "utf-8"), path);
}

/** Extract one numeric column of one robot's rows, rejecting null holes. */
export function series(rows: Row[], column: Column, name = "csv"): number[] {
  return rows.map((r) => {
    const v = r[column];
    if (v === null || Number.isNaN(v)) {
      throw new Error(`${name}: column ${column} has empty values for robot ${r.robot_id}`);
    }
    return v;
  });
}
