// Layperson wording for what is being tuned. Participants are told the
// aspect, never the parameter name or its numbers.

const ASPECTS: Record<string, string> = {
  v_max: "speed",
  x: "position",
  y: "position",
  z: "position",
  f_min: "grip force",
};

const DETAILS: Record<string, string> = {
  v_max: "how quickly the robot reaches out",
  x: "how far forward the robot offers the object",
  y: "how far to your left or right the object is offered",
  z: "how high the object is offered",
  f_min: "how firmly the robot holds on before letting go",
};

export function aspectLabel(parameter: string): string {
  return ASPECTS[parameter] ?? "this aspect";
}

export function aspectDetail(parameter: string): string {
  return DETAILS[parameter] ?? "one aspect of the handover";
}

export const PHASE_TITLES: Record<string, string> = {
  practice1: "Warm-up handovers",
  tuning: "Tuning",
  practice2: "Handovers with your settings",
  evaluation: "Which one is yours?",
  complete: "All done",
};
