//! Rechallenge attributes over repeat patients.
//!
//! A patient's prescriptions of a drug are chained into challenge episodes:
//! consecutive prescriptions at most [`REPEAT_GAP_DAYS`] apart share an
//! episode, anchored at its first prescription. Repeat patients have two or
//! more episodes. Each episode contributes one hazard window after its
//! anchor and one non-hazard window before it.

use crate::association::Pair;
use crate::context::{Context, Measure, REPEAT_GAP_DAYS};
use crate::store::{any_in, count_in, Criterion, Day};

/// Anchor dates of the challenge episodes in a sorted date sequence.
pub fn episode_anchors(sorted_dates: &[Day]) -> Vec<Day> {
    let mut anchors = Vec::new();
    let mut prev: Option<Day> = None;
    for &d in sorted_dates {
        if prev.is_none_or(|p| d - p > REPEAT_GAP_DAYS) {
            anchors.push(d);
        }
        prev = Some(d);
    }
    anchors
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepeatPatient {
    pub patient: usize,
    pub anchors: Vec<Day>,
}

pub fn repeat_patients(ctx: &Context<'_>, pair: Pair) -> Vec<RepeatPatient> {
    let db = ctx.db();
    let mut out = Vec::new();
    let mut dates: Vec<Day> = Vec::new();
    let mut current: Option<usize> = None;
    let mut flush = |patient: Option<usize>, dates: &mut Vec<Day>| {
        if let Some(patient) = patient {
            let anchors = episode_anchors(dates);
            if anchors.len() >= 2 {
                out.push(RepeatPatient { patient, anchors });
            }
        }
        dates.clear();
    };
    for i in ctx.qualifying_indices(pair.drug, Criterion::All) {
        let p = &db.prescriptions()[i];
        if current != Some(p.patient) {
            flush(current, &mut dates);
            current = Some(p.patient);
        }
        dates.push(p.date);
    }
    flush(current, &mut dates);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RepeatCounts {
    /// Event in two or more hazard periods, never in a non-hazard period.
    pub rechallenge_positive: u64,
    /// Event in exactly one hazard period, never in a non-hazard period.
    pub single_challenge: u64,
    /// Event occurrences inside non-hazard periods of repeat patients.
    pub non_hazard_events: u64,
    pub repeat_patients: u64,
}

pub fn repeat_counts(ctx: &Context<'_>, pair: Pair) -> RepeatCounts {
    let db = ctx.db();
    let w = ctx.windows();
    let mut counts = RepeatCounts::default();
    for rp in repeat_patients(ctx, pair) {
        counts.repeat_patients += 1;
        let dates = db.event_dates(&pair.code, rp.patient);
        let mut hazard_hits = 0;
        let mut background = 0u64;
        for &anchor in &rp.anchors {
            let (lo, hi) = w.hazard.around(anchor);
            hazard_hits += usize::from(any_in(dates, lo, hi));
            let (lo, hi) = w.non_hazard.around(anchor);
            background += count_in(dates, lo, hi) as u64;
        }
        counts.non_hazard_events += background;
        if background == 0 {
            match hazard_hits {
                0 => {}
                1 => counts.single_challenge += 1,
                _ => counts.rechallenge_positive += 1,
            }
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeatAttributes {
    pub repeat1: Measure,
    pub repeat2: Measure,
}

impl From<RepeatCounts> for RepeatAttributes {
    fn from(c: RepeatCounts) -> Self {
        let n2 = Measure::of(c.rechallenge_positive as f64);
        RepeatAttributes {
            repeat1: Measure::ratio(n2, Measure::of(c.single_challenge as f64)),
            repeat2: Measure::ratio(n2, Measure::of(c.non_hazard_events as f64)),
        }
    }
}

pub fn repeats(ctx: &Context<'_>, pair: Pair) -> RepeatAttributes {
    repeat_counts(ctx, pair).into()
}
