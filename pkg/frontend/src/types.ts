/** Wire types for the gateway HTTP and streaming API. */

export interface GraphNode {
  id: string;
  label: string;
  category: string;
  x: number;
  y: number;
}

export interface GraphEdge {
  src: string;
  dst: string;
  relation: string;
}

export interface GraphDoc {
  constellation: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface CharacteristicRow {
  code: string;
  label: string;
  text: string;
  sources: string[];
}

export interface RelationRow {
  name: string;
  target: string;
}

export interface ScalarRow {
  name: string;
  value: boolean | number | string;
}

export interface BindingDoc {
  topic?: string;
  script?: string;
}

export interface ComponentDoc {
  id: string;
  kind: string;
  desc: string | null;
  relations: RelationRow[];
  scalars: ScalarRow[];
  binding: BindingDoc | null;
}

export interface ClosureDoc {
  ids: string[];
}

export interface SampleDoc {
  topic: string;
  ts: number;
  fields: Record<string, number>;
  seq: number;
}

export interface SamplesDoc {
  topic: string;
  samples: SampleDoc[];
}

export interface GapDoc {
  gap: number;
}

export type StreamEvent = SampleDoc | GapDoc;

export function isGap(event: StreamEvent): event is GapDoc {
  return typeof (event as GapDoc).gap === "number";
}

export type Direction = "forward" | "backward" | "both";

export const DIRECTIONS: readonly Direction[] = ["forward", "backward", "both"];
