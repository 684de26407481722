//! Analysis parameters, window conventions and the per-run context shared
//! by all attribute computations.

use crate::error::{Error, Result};
use crate::store::{Criterion, Database, Day, DrugId};

pub const DEFAULT_MONTH_DAYS: Day = 30;
pub const DEFAULT_LOOKBACK_DAYS: Day = 395;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_AB_ZERO_SUB: f64 = 0.5;
/// Gap (strictly exceeded) separating two challenge episodes.
pub const REPEAT_GAP_DAYS: Day = 365;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub month_days: Day,
    pub lookback_days: Day,
    pub alpha: f64,
    pub ab_zero_sub: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            month_days: DEFAULT_MONTH_DAYS,
            lookback_days: DEFAULT_LOOKBACK_DAYS,
            alpha: DEFAULT_ALPHA,
            ab_zero_sub: DEFAULT_AB_ZERO_SUB,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if !(1..REPEAT_GAP_DAYS).contains(&self.month_days) {
            return Err(Error::Param(format!("month-days {} outside 1..365", self.month_days)));
        }
        if self.lookback_days < 0 {
            return Err(Error::Param("lookback-days must be nonnegative".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Param(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !(self.ab_zero_sub > 0.0 && self.ab_zero_sub.is_finite()) {
            return Err(Error::Param("ab-zero-sub must be positive".into()));
        }
        Ok(())
    }

    pub fn windows(&self) -> WindowSpec {
        WindowSpec::new(self.month_days)
    }
}

/// Inclusive range of day offsets relative to an anchor date.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: Day,
    pub end: Day,
}

impl Window {
    pub const fn new(start: Day, end: Day) -> Self {
        Window { start, end }
    }

    pub fn contains(&self, offset: Day) -> bool {
        (self.start..=self.end).contains(&offset)
    }

    /// Absolute `[lo, hi]` bounds around `anchor`.
    pub fn around(&self, anchor: Day) -> (Day, Day) {
        (anchor + self.start, anchor + self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub month_after: Window,
    pub month_before: Window,
    pub day_of: Window,
    pub hazard: Window,
    pub non_hazard: Window,
}

impl WindowSpec {
    /// Hazard and non-hazard tile one year: `[1, m]` and `[-(365 - m), -1]`.
    pub fn new(month_days: Day) -> Self {
        WindowSpec {
            month_after: Window::new(1, month_days),
            month_before: Window::new(-month_days, -1),
            day_of: Window::new(0, 0),
            hazard: Window::new(1, month_days),
            non_hazard: Window::new(-(REPEAT_GAP_DAYS - month_days), -1),
        }
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::new(DEFAULT_MONTH_DAYS)
    }
}

/// An attribute value with its undefined-attribute flag. Undefined
/// attributes carry the sentinel value 0.0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measure {
    pub value: f64,
    pub missing: bool,
}

impl Measure {
    pub const MISSING: Measure = Measure {
        value: 0.0,
        missing: true,
    };

    pub fn of(value: f64) -> Self {
        Measure { value, missing: false }
    }

    pub fn flag(on: bool) -> Self {
        Measure::of(if on { 1.0 } else { 0.0 })
    }

    /// `num / den`, missing when `den` is zero or either side is missing.
    pub fn ratio(num: Measure, den: Measure) -> Self {
        if num.missing || den.missing || den.value == 0.0 {
            Measure::MISSING
        } else {
            Measure::of(num.value / den.value)
        }
    }
}

/// Database plus parameters and precomputed prescription filters.
pub struct Context<'db> {
    db: &'db Database,
    params: Params,
    windows: WindowSpec,
    qualifying: [Vec<bool>; 3],
    per_drug: [Vec<u64>; 3],
    totals: [u64; 3],
}

impl<'db> Context<'db> {
    pub fn new(db: &'db Database, params: Params) -> Result<Self> {
        params.validate()?;
        let qualifying = Criterion::ALL.map(|c| db.qualifying_flags(c, params.lookback_days));
        let n_drugs = db.drug_codes().len();
        let per_drug = std::array::from_fn(|slot| {
            let mut counts = vec![0u64; n_drugs];
            for (p, &q) in db.prescriptions().iter().zip(&qualifying[slot]) {
                if q {
                    counts[p.drug.index()] += 1;
                }
            }
            counts
        });
        let totals = std::array::from_fn(|slot: usize| per_drug[slot].iter().sum());
        Ok(Context {
            db,
            params,
            windows: params.windows(),
            qualifying,
            per_drug,
            totals,
        })
    }

    pub fn db(&self) -> &'db Database {
        self.db
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn windows(&self) -> &WindowSpec {
        &self.windows
    }

    /// Flags index-aligned with [`Database::prescriptions`].
    pub fn qualifying(&self, criterion: Criterion) -> &[bool] {
        &self.qualifying[criterion.slot()]
    }

    pub fn qualifying_count(&self, drug: DrugId, criterion: Criterion) -> u64 {
        self.per_drug[criterion.slot()][drug.index()]
    }

    pub fn qualifying_total(&self, criterion: Criterion) -> u64 {
        self.totals[criterion.slot()]
    }

    /// Qualifying prescription indices of `drug`, ordered by patient then date.
    pub fn qualifying_indices(&self, drug: DrugId, criterion: Criterion) -> impl Iterator<Item = usize> + '_ {
        let flags = self.qualifying(criterion);
        self.db
            .drug_prescription_indices(drug)
            .iter()
            .copied()
            .filter(move |&i| flags[i])
    }
}
