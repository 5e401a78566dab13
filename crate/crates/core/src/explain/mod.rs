//! Per-learner attribution, alert rationales and the intervention rules.

mod intervention;
mod rationale;
mod shapley;

pub use intervention::{
    map_intervention, Clock, InterventionPlan, ManualClock, PlanEvent, PlanState, SystemClock, Transition,
};
pub use rationale::{compose_rationale, CitedPassage, Direction, Rationale, RationaleInputs, RiskFactor};
pub use shapley::{
    groups_from_slot_fields, shapley_attribution, stratified_background, Attribution, FeatureContribution,
    ModalitySummary, DEFAULT_SHAPLEY_SAMPLES,
};
