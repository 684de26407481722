//! Specificity attributes: age spread and sex balance of the event cohort,
//! code specificity, and drug- versus family-level risk ratio.

use crate::association::{build_bnf_table, build_table, risk_ratio, Pair};
use crate::context::{Context, Measure};
use crate::readcode::ReadCode;
use crate::store::{any_in, year_of, Criterion, Gender};

/// One patient prescribed the drug.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohortMember {
    pub patient: usize,
    /// Age in whole years at the first qualifying prescription.
    pub age: i32,
    pub gender: Gender,
    /// Event recorded in the month after any qualifying prescription.
    pub had_event: bool,
}

pub fn drug_cohort(ctx: &Context<'_>, pair: Pair) -> Vec<CohortMember> {
    let db = ctx.db();
    let window = ctx.windows().month_after;
    let mut cohort: Vec<CohortMember> = Vec::new();
    for i in ctx.qualifying_indices(pair.drug, Criterion::All) {
        let p = &db.prescriptions()[i];
        let dates = db.event_dates(&pair.code, p.patient);
        let (lo, hi) = window.around(p.date);
        let hit = any_in(dates, lo, hi);
        match cohort.last_mut() {
            Some(last) if last.patient == p.patient => last.had_event |= hit,
            _ => {
                let rec = db.patient(p.patient);
                cohort.push(CohortMember {
                    patient: p.patient,
                    age: year_of(p.date) - rec.birth_year,
                    gender: rec.gender,
                    had_event: hit,
                });
            }
        }
    }
    cohort
}

/// Population standard deviation.
pub fn population_stdev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

pub fn age_stdev_ratio_of(cohort: &[CohortMember]) -> Measure {
    let all: Vec<f64> = cohort.iter().map(|m| f64::from(m.age)).collect();
    let events: Vec<f64> = cohort
        .iter()
        .filter(|m| m.had_event)
        .map(|m| f64::from(m.age))
        .collect();
    if all.len() < 2 || events.len() < 2 {
        return Measure::MISSING;
    }
    Measure::ratio(
        Measure::of(population_stdev(&events)),
        Measure::of(population_stdev(&all)),
    )
}

pub fn gender_ratio_of(cohort: &[CohortMember]) -> Measure {
    let male_share = |members: &mut dyn Iterator<Item = &CohortMember>| {
        let (mut n, mut male) = (0usize, 0usize);
        for m in members {
            n += 1;
            male += usize::from(m.gender == Gender::Male);
        }
        if n == 0 {
            Measure::MISSING
        } else {
            Measure::of(male as f64 / n as f64)
        }
    };
    let events = male_share(&mut cohort.iter().filter(|m| m.had_event));
    let overall = male_share(&mut cohort.iter());
    Measure::ratio(events, overall)
}

pub fn age_stdev_ratio(ctx: &Context<'_>, pair: Pair) -> Measure {
    age_stdev_ratio_of(&drug_cohort(ctx, pair))
}

pub fn gender_ratio(ctx: &Context<'_>, pair: Pair) -> Measure {
    gender_ratio_of(&drug_cohort(ctx, pair))
}

pub fn read_code_level(code: &ReadCode) -> Measure {
    Measure::of(f64::from(code.level()))
}

pub fn rr_drug_over_bnf(ctx: &Context<'_>, pair: Pair) -> Measure {
    let drug = risk_ratio(&build_table(ctx, pair, Criterion::All));
    let family = risk_ratio(&build_bnf_table(ctx, pair));
    Measure::ratio(drug, family)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecificityAttributes {
    pub age_stdev_ratio: Measure,
    pub gender_ratio: Measure,
    pub read_code_level: Measure,
    pub rr_drug_over_bnf: Measure,
}

pub fn specificity_attributes(ctx: &Context<'_>, pair: Pair) -> SpecificityAttributes {
    let cohort = drug_cohort(ctx, pair);
    SpecificityAttributes {
        age_stdev_ratio: age_stdev_ratio_of(&cohort),
        gender_ratio: gender_ratio_of(&cohort),
        read_code_level: read_code_level(&pair.code),
        rr_drug_over_bnf: rr_drug_over_bnf(ctx, pair),
    }
}
