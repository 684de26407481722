//! Two-by-two contingency tables and association-strength measures.
//!
//! The counting unit is one qualifying prescription: a prescription counts
//! toward the event column when the patient has the exact event code
//! recorded inside the counting window anchored at the prescription date.

use crate::context::{Context, Measure, Window};
use crate::error::Result;
use crate::readcode::ReadCode;
use crate::store::{any_in, Criterion, DrugId, Prescription};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ContingencyTable {
    /// Drug of interest, event in window.
    pub a: u64,
    /// Drug of interest, no event in window.
    pub b: u64,
    /// Other drugs, event in window.
    pub c: u64,
    /// Other drugs, no event in window.
    pub d: u64,
}

impl ContingencyTable {
    pub const fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    fn arms_nonempty(&self) -> bool {
        self.a + self.b > 0 && self.c + self.d > 0
    }

    /// Exchange exposed and comparator rows.
    pub fn swap_rows(&self) -> Self {
        ContingencyTable::new(self.c, self.d, self.a, self.b)
    }
}

/// A (drug, event) pair resolved against the database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair {
    pub drug: DrugId,
    pub code: ReadCode,
}

impl Pair {
    pub fn resolve(ctx: &Context<'_>, drug_code: &str, read_code: &ReadCode) -> Result<Pair> {
        let drug = ctx.db().drug_id(drug_code)?;
        ctx.db().check_event(read_code)?;
        Ok(Pair { drug, code: *read_code })
    }
}

/// Table over qualifying prescriptions using the month-after window.
pub fn build_table(ctx: &Context<'_>, pair: Pair, criterion: Criterion) -> ContingencyTable {
    build_table_in(ctx, pair, criterion, ctx.windows().month_after)
}

pub fn build_table_in(ctx: &Context<'_>, pair: Pair, criterion: Criterion, window: Window) -> ContingencyTable {
    let exposed_total = ctx.qualifying_count(pair.drug, criterion);
    tabulate(ctx, pair.code, criterion, window, exposed_total, |p| {
        p.drug == pair.drug
    })
}

/// Table whose exposed arm is every prescription in the drug's BNF family
/// and whose comparator is every prescription of other families.
pub fn build_bnf_table(ctx: &Context<'_>, pair: Pair) -> ContingencyTable {
    let bnf = ctx.db().drug_bnf(pair.drug);
    let exposed_total = ctx.db().prescriptions().iter().filter(|p| p.bnf == bnf).count() as u64;
    tabulate(
        ctx,
        pair.code,
        Criterion::All,
        ctx.windows().month_after,
        exposed_total,
        |p| p.bnf == bnf,
    )
}

fn tabulate(
    ctx: &Context<'_>,
    code: ReadCode,
    criterion: Criterion,
    window: Window,
    exposed_total: u64,
    exposed: impl Fn(&Prescription) -> bool,
) -> ContingencyTable {
    let db = ctx.db();
    let flags = ctx.qualifying(criterion);
    let (mut a, mut c) = (0u64, 0u64);
    if let Some(occ) = db.occurrences(&code) {
        for (patient, dates) in occ.iter() {
            let range = db.patient_rx_range(patient);
            for (p, &q) in db.prescriptions()[range.clone()].iter().zip(&flags[range]) {
                if !q {
                    continue;
                }
                let (lo, hi) = window.around(p.date);
                if any_in(dates, lo, hi) {
                    if exposed(p) {
                        a += 1;
                    } else {
                        c += 1;
                    }
                }
            }
        }
    }
    let other_total = ctx.qualifying_total(criterion) - exposed_total;
    ContingencyTable::new(a, exposed_total - a, c, other_total - c)
}

pub fn risk_difference(t: &ContingencyTable) -> Measure {
    if !t.arms_nonempty() {
        return Measure::MISSING;
    }
    let (a, b, c, d) = cells(t);
    Measure::of(a / (a + b) - c / (c + d))
}

/// Risk ratio; a zero comparator event count is replaced by 0.5 when the
/// exposed arm has events. With no events in either arm the ratio is
/// undefined.
pub fn risk_ratio(t: &ContingencyTable) -> Measure {
    if !t.arms_nonempty() {
        return Measure::MISSING;
    }
    let (a, b, mut c, d) = cells(t);
    if t.c == 0 {
        if t.a == 0 {
            return Measure::MISSING;
        }
        c = 0.5;
    }
    Measure::of((a / (a + b)) / (c / (t.c as f64 + d)))
}

/// Odds ratio with the Haldane-Anscombe correction (+0.5 on every cell)
/// when `b * c == 0`.
pub fn odds_ratio(t: &ContingencyTable) -> Measure {
    if !t.arms_nonempty() {
        return Measure::MISSING;
    }
    let (mut a, mut b, mut c, mut d) = cells(t);
    if t.b == 0 || t.c == 0 {
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    }
    Measure::of(a * d / (b * c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InformationComponent {
    pub ic: Measure,
    pub lower: Measure,
}

/// Shrunk log2 observed-to-expected ratio with expectation taken from the
/// table margins, and its approximate lower 95% credibility bound.
pub fn ic_delta(t: &ContingencyTable) -> InformationComponent {
    let n = t.total();
    if n == 0 {
        return InformationComponent {
            ic: Measure::MISSING,
            lower: Measure::MISSING,
        };
    }
    let observed = t.a as f64 + 0.5;
    let expected = ((t.a + t.b) as f64) * ((t.a + t.c) as f64) / n as f64;
    let ic = (observed / (expected + 0.5)).log2();
    let lower = ic - 3.3 * observed.powf(-0.5) - 2.0 * observed.powf(-1.5);
    InformationComponent {
        ic: Measure::of(ic),
        lower: Measure::of(lower),
    }
}

fn cells(t: &ContingencyTable) -> (f64, f64, f64, f64) {
    (t.a as f64, t.b as f64, t.c as f64, t.d as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strength {
    pub rd: Measure,
    pub rr: Measure,
    pub or_: Measure,
}

impl Strength {
    pub fn of(t: &ContingencyTable) -> Self {
        Strength {
            rd: risk_difference(t),
            rr: risk_ratio(t),
            or_: odds_ratio(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationAttributes {
    pub all: Strength,
    pub first_drug: Strength,
    pub first_bnf: Strength,
    pub ic_delta: Measure,
    pub lower_ic_delta: Measure,
}

pub fn association_attributes(ctx: &Context<'_>, pair: Pair) -> AssociationAttributes {
    let all = build_table(ctx, pair, Criterion::All);
    let first_drug = build_table(ctx, pair, Criterion::FirstInLookbackDrug);
    let first_bnf = build_table(ctx, pair, Criterion::FirstInLookbackBnf);
    let ic = ic_delta(&all);
    AssociationAttributes {
        all: Strength::of(&all),
        first_drug: Strength::of(&first_drug),
        first_bnf: Strength::of(&first_bnf),
        ic_delta: ic.ic,
        lower_ic_delta: ic.lower,
    }
}
