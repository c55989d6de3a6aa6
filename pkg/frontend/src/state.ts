/** Selection state shared by the five views.
 *
 *  Single UI thread of control: async responses are stamped with a request
 *  epoch and discarded when a newer interaction superseded them. The
 *  practice/learning phase only changes through the explicit toggle.
 */

export type Phase = "practice" | "learning";

export interface CaseFilter {
  specialty?: string;
  from?: string;
  to?: string;
  query?: string;
}

export interface DrawnShape {
  caseId: string;
  bbox: [number, number, number, number];
  label: string;
  note: string;
}

export class SelectionState {
  filter: CaseFilter = {};
  selectedCase: string | null = null;
  lassoIds: string[] = [];
  k = 5;
  phase: Phase = "practice";
  drawnShapes: DrawnShape[] = [];

  private epoch = 0;

  /** Stamp an outgoing request; compare on arrival with isCurrent. */
  nextEpoch(): number {
    this.epoch += 1;
    return this.epoch;
  }

  isCurrent(epoch: number): boolean {
    return epoch === this.epoch;
  }

  selectCase(caseId: string | null): void {
    this.selectedCase = caseId;
    this.phase = "practice"; // a new case always starts unassisted
    this.drawnShapes = [];
  }

  setLasso(ids: string[]): void {
    this.lassoIds = [...ids];
  }

  /** The explicit phase switch; nothing else may flip the phase. */
  togglePhase(): Phase {
    this.phase = this.phase === "practice" ? "learning" : "practice";
    return this.phase;
  }

  /** Practice-phase drawing always attaches to the selected case. */
  addShape(bbox: [number, number, number, number], label: string, note: string): DrawnShape {
    if (this.selectedCase === null) {
      throw new Error("cannot draw: no case selected");
    }
    const shape: DrawnShape = { caseId: this.selectedCase, bbox, label, note };
    this.drawnShapes.push(shape);
    return shape;
  }
}
