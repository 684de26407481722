//! Dose-response attributes over per-patient `(dosage, had_event)` tuples.
//!
//! Only milligram prescriptions take part; each patient contributes the
//! dosage of their first such prescription.

use crate::association::Pair;
use crate::context::{Context, Measure};
use crate::store::{any_in, Criterion};

/// Denominator used when nobody on the lowest dosage has the event.
pub const LOW_DOSE_ZERO_SUB: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoseTuple {
    pub dosage: f64,
    pub event: bool,
}

impl DoseTuple {
    pub fn new(dosage: f64, event: bool) -> Self {
        DoseTuple { dosage, event }
    }
}

pub fn dosage_tuples(ctx: &Context<'_>, pair: Pair) -> Vec<DoseTuple> {
    let db = ctx.db();
    let window = ctx.windows().month_after;
    let mut tuples: Vec<(usize, DoseTuple)> = Vec::new();
    for i in ctx.qualifying_indices(pair.drug, Criterion::All) {
        let p = &db.prescriptions()[i];
        let Some(dosage) = p.mg_dosage() else {
            continue;
        };
        let (lo, hi) = window.around(p.date);
        let hit = any_in(db.event_dates(&pair.code, p.patient), lo, hi);
        match tuples.last_mut() {
            Some((patient, t)) if *patient == p.patient => t.event |= hit,
            _ => tuples.push((p.patient, DoseTuple::new(dosage, hit))),
        }
    }
    tuples.into_iter().map(|(_, t)| t).collect()
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn dosage_ratio(tuples: &[DoseTuple]) -> Measure {
    let with_event = mean(tuples.iter().filter(|t| t.event).map(|t| t.dosage));
    let overall = mean(tuples.iter().map(|t| t.dosage));
    match (with_event, overall) {
        (Some(e), Some(o)) if o > 0.0 => Measure::of(e / o),
        _ => Measure::MISSING,
    }
}

pub fn high_low_ratio(tuples: &[DoseTuple]) -> Measure {
    let Some(first) = tuples.first() else {
        return Measure::MISSING;
    };
    let (lo, hi) = tuples.iter().fold((first.dosage, first.dosage), |(lo, hi), t| {
        (lo.min(t.dosage), hi.max(t.dosage))
    });
    if lo == hi {
        return Measure::MISSING;
    }
    let proportion = |level: f64| {
        let at: Vec<_> = tuples.iter().filter(|t| t.dosage == level).collect();
        at.iter().filter(|t| t.event).count() as f64 / at.len() as f64
    };
    let p_low = proportion(lo);
    let den = if p_low == 0.0 { LOW_DOSE_ZERO_SUB } else { p_low };
    Measure::of(proportion(hi) / den)
}

pub fn pearson_of(xs: &[f64], ys: &[f64]) -> Measure {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return Measure::MISSING;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Measure::MISSING;
    }
    Measure::of((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties given their mean rank.
pub fn mean_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn split(tuples: &[DoseTuple]) -> (Vec<f64>, Vec<f64>) {
    tuples
        .iter()
        .map(|t| (t.dosage, if t.event { 1.0 } else { 0.0 }))
        .unzip()
}

pub fn pearson(tuples: &[DoseTuple]) -> Measure {
    let (xs, ys) = split(tuples);
    pearson_of(&xs, &ys)
}

pub fn spearman(tuples: &[DoseTuple]) -> Measure {
    let (xs, ys) = split(tuples);
    pearson_of(&mean_ranks(&xs), &mean_ranks(&ys))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DosageAttributes {
    pub dosage_ratio: Measure,
    pub high_low_ratio: Measure,
    pub spearman: Measure,
    pub pearson: Measure,
}

pub fn dosage_attributes(ctx: &Context<'_>, pair: Pair) -> DosageAttributes {
    let tuples = dosage_tuples(ctx, pair);
    DosageAttributes {
        dosage_ratio: dosage_ratio(&tuples),
        high_low_ratio: high_low_ratio(&tuples),
        spearman: spearman(&tuples),
        pearson: pearson(&tuples),
    }
}
