//! Temporal attributes: the LEOPARD prescription-order test, the two
//! observed-to-expected window filters and the after/before ratios over
//! generalised event codes.

use crate::association::{build_table_in, ic_delta, Pair};
use crate::context::{Context, Measure};
use crate::error::Result;
use crate::store::{count_in, Criterion};

/// Upper tail `P(X >= successes)` for `X ~ Binomial(trials, p)`, summed
/// exactly term by term in log space.
pub fn binomial_upper_tail(successes: u64, trials: u64, p: f64) -> f64 {
    if successes == 0 {
        return 1.0;
    }
    if successes > trials {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let n = trials as f64;
    let log_odds = p.ln() - (1.0 - p).ln();
    // ln pmf(k) built up from ln pmf(0) = n ln(1 - p)
    let mut ln_pmf = n * (1.0 - p).ln();
    for k in 1..=successes {
        ln_pmf += ((n - k as f64 + 1.0) / k as f64).ln() + log_odds;
    }
    let mut terms = Vec::with_capacity((trials - successes + 1) as usize);
    terms.push(ln_pmf);
    for k in successes + 1..=trials {
        ln_pmf += ((n - k as f64 + 1.0) / k as f64).ln() + log_odds;
        terms.push(ln_pmf);
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}

/// One-sided test of "more prescriptions after the event than before" at
/// level `alpha`. No trials never rejects.
pub fn leopard_decision(n_before: u64, n_after: u64, alpha: f64) -> bool {
    let trials = n_before + n_after;
    trials > 0 && binomial_upper_tail(n_after, trials, 0.5) <= alpha
}

/// Drug prescriptions in the month before and the month after each
/// patient's first occurrence of the event, summed over patients.
pub fn leopard_counts(ctx: &Context<'_>, pair: Pair) -> (u64, u64) {
    let db = ctx.db();
    let w = ctx.windows();
    let Some(occ) = db.occurrences(&pair.code) else {
        return (0, 0);
    };
    let (mut before, mut after) = (0u64, 0u64);
    let mut dates = Vec::new();
    for (patient, event_dates) in occ.iter() {
        let first = event_dates[0];
        dates.clear();
        dates.extend(
            db.patient_prescriptions(patient)
                .iter()
                .filter(|p| p.drug == pair.drug)
                .map(|p| p.date),
        );
        let (lo, hi) = w.month_before.around(first);
        before += count_in(&dates, lo, hi) as u64;
        let (lo, hi) = w.month_after.around(first);
        after += count_in(&dates, lo, hi) as u64;
    }
    (before, after)
}

pub fn leopard(ctx: &Context<'_>, pair: Pair) -> Measure {
    let (before, after) = leopard_counts(ctx, pair);
    Measure::flag(leopard_decision(before, after, ctx.params().alpha))
}

/// `(oe_filt1, oe_filt2)`: whether the IC over the month before, resp. the
/// day of prescription, exceeds the IC over the month after.
pub fn oe_filters(ctx: &Context<'_>, pair: Pair) -> (Measure, Measure) {
    let w = ctx.windows();
    let ic = |window| ic_delta(&build_table_in(ctx, pair, Criterion::All, window)).ic;
    let after = ic(w.month_after);
    let exceeds = |other: Measure| Measure::flag(!other.missing && !after.missing && other.value > after.value);
    (exceeds(ic(w.month_before)), exceeds(ic(w.day_of)))
}

/// Qualifying prescriptions with at least one event generalising to the
/// pair's code at `level` in the month after (`.0`) and before (`.1`).
pub fn ab_counts(ctx: &Context<'_>, pair: Pair, level: u8) -> Result<(u64, u64)> {
    let target = pair.code.rollup(level)?;
    let db = ctx.db();
    let w = ctx.windows();
    let matches_in = |events: &[crate::store::EventRecord], lo, hi| {
        let start = events.partition_point(|e| e.date < lo);
        events[start..]
            .iter()
            .take_while(|e| e.date <= hi)
            .any(|e| e.read_code.rollup_unchecked(level) == target)
    };
    let (mut after, mut before) = (0u64, 0u64);
    for i in ctx.qualifying_indices(pair.drug, Criterion::All) {
        let p = &db.prescriptions()[i];
        let events = db.patient_events(p.patient);
        let (lo, hi) = w.month_after.around(p.date);
        after += u64::from(matches_in(events, lo, hi));
        let (lo, hi) = w.month_before.around(p.date);
        before += u64::from(matches_in(events, lo, hi));
    }
    Ok((after, before))
}

/// `after / before`, with a zero `before` replaced by `zero_sub`.
pub fn ab_ratio_from_counts(after: u64, before: u64, zero_sub: f64) -> f64 {
    let den = if before == 0 { zero_sub } else { before as f64 };
    after as f64 / den
}

pub fn ab_ratio(ctx: &Context<'_>, pair: Pair, level: u8) -> Result<Measure> {
    let (after, before) = ab_counts(ctx, pair, level)?;
    Ok(Measure::of(ab_ratio_from_counts(
        after,
        before,
        ctx.params().ab_zero_sub,
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalAttributes {
    pub leopard: Measure,
    pub oe_filt1: Measure,
    pub oe_filt2: Measure,
    pub ab_ratio_l2: Measure,
    pub ab_ratio_l3: Measure,
}

pub fn temporal_attributes(ctx: &Context<'_>, pair: Pair) -> TemporalAttributes {
    let (oe_filt1, oe_filt2) = oe_filters(ctx, pair);
    TemporalAttributes {
        leopard: leopard(ctx, pair),
        oe_filt1,
        oe_filt2,
        ab_ratio_l2: ab_ratio(ctx, pair, 2).expect("level 2 is valid"),
        ab_ratio_l3: ab_ratio(ctx, pair, 3).expect("level 3 is valid"),
    }
}
