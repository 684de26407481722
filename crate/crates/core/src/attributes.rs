//! The attribute catalogue and the registry of extractors that fill it.
//!
//! Each causality criterion is an [`AttributeExtractor`] registered by
//! name. A feature run selects extractors from the registry and the
//! resulting matrix holds the union of their columns in catalogue order.

use std::fmt;
use std::str::FromStr;

use crate::association::{association_attributes, Pair};
use crate::context::{Context, Measure};
use crate::dosage::dosage_attributes;
use crate::error::{Error, Result};
use crate::experimentation::repeats;
use crate::specificity::specificity_attributes;
use crate::temporality::temporal_attributes;

macro_rules! attributes {
    ($($variant:ident => $name:literal, $criterion:ident, $kind:ident;)*) => {
        /// Every attribute, in report order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Attribute {
            $($variant,)*
        }

        impl Attribute {
            pub const ALL: [Attribute; 26] = [$(Attribute::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Attribute::$variant => $name,)*
                }
            }

            pub fn criterion(self) -> CriterionKind {
                match self {
                    $(Attribute::$variant => CriterionKind::$criterion,)*
                }
            }

            pub fn kind(self) -> ValueKind {
                match self {
                    $(Attribute::$variant => ValueKind::$kind,)*
                }
            }
        }
    };
}

attributes! {
    Leopard => "leopard", Temporality, Categorical;
    OeFilt1 => "oe_filt1", Temporality, Categorical;
    OeFilt2 => "oe_filt2", Temporality, Categorical;
    Rd13Bnf => "rd_13bnf", Strength, Continuous;
    Rd13d => "rd_13d", Strength, Continuous;
    Rd => "rd", Strength, Continuous;
    AbRatioL3 => "ab_ratio_l3", Temporality, Continuous;
    AbRatioL2 => "ab_ratio_l2", Temporality, Continuous;
    Rr13d => "rr_13d", Strength, Continuous;
    Or13d => "or_13d", Strength, Continuous;
    Rr13Bnf => "rr_13bnf", Strength, Continuous;
    Or13Bnf => "or_13bnf", Strength, Continuous;
    Rr => "rr", Strength, Continuous;
    Or => "or", Strength, Continuous;
    LowerIcDelta => "lower_ic_delta", Strength, Continuous;
    Pearson => "pearson", Dosage, Continuous;
    GenderRatio => "gender_ratio", Specificity, Continuous;
    Repeat1 => "repeat1", Experimentation, Continuous;
    Repeat2 => "repeat2", Experimentation, Continuous;
    IcDelta => "ic_delta", Strength, Continuous;
    ReadCodeLevel => "read_code_level", Specificity, Categorical;
    RrDrugOverBnf => "rr_drug_over_bnf", Specificity, Continuous;
    DosageRatio => "dosage_ratio", Dosage, Continuous;
    HighLowRatio => "high_low_ratio", Dosage, Continuous;
    AgeStdevRatio => "age_stdev_ratio", Specificity, Continuous;
    Spearman => "spearman", Dosage, Continuous;
}

impl Attribute {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::DegenerateMatrix(format!("unknown attribute column `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionKind {
    Strength,
    Temporality,
    Specificity,
    Dosage,
    Experimentation,
}

/// How the selection step treats a column: categorical values are used as
/// they are, continuous ones are binned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Categorical,
    Continuous,
}

/// Attribute values for one pair, indexed by [`Attribute::index`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureRow {
    cells: [Option<Measure>; 26],
}

impl FeatureRow {
    pub fn set(&mut self, attr: Attribute, m: Measure) {
        self.cells[attr.index()] = Some(m);
    }

    pub fn get(&self, attr: Attribute) -> Option<Measure> {
        self.cells[attr.index()]
    }
}

pub trait AttributeExtractor: Send + Sync {
    fn name(&self) -> &'static str;

    /// Columns this extractor fills.
    fn attributes(&self) -> &'static [Attribute];

    fn extract(&self, ctx: &Context<'_>, pair: Pair, row: &mut FeatureRow);
}

pub struct StrengthExtractor;

impl AttributeExtractor for StrengthExtractor {
    fn name(&self) -> &'static str {
        "strength"
    }

    fn attributes(&self) -> &'static [Attribute] {
        use Attribute::*;
        &[
            Rd13Bnf,
            Rd13d,
            Rd,
            Rr13d,
            Or13d,
            Rr13Bnf,
            Or13Bnf,
            Rr,
            Or,
            LowerIcDelta,
            IcDelta,
        ]
    }

    fn extract(&self, ctx: &Context<'_>, pair: Pair, row: &mut FeatureRow) {
        let a = association_attributes(ctx, pair);
        row.set(Attribute::Rd, a.all.rd);
        row.set(Attribute::Rr, a.all.rr);
        row.set(Attribute::Or, a.all.or_);
        row.set(Attribute::Rd13d, a.first_drug.rd);
        row.set(Attribute::Rr13d, a.first_drug.rr);
        row.set(Attribute::Or13d, a.first_drug.or_);
        row.set(Attribute::Rd13Bnf, a.first_bnf.rd);
        row.set(Attribute::Rr13Bnf, a.first_bnf.rr);
        row.set(Attribute::Or13Bnf, a.first_bnf.or_);
        row.set(Attribute::IcDelta, a.ic_delta);
        row.set(Attribute::LowerIcDelta, a.lower_ic_delta);
    }
}

pub struct TemporalityExtractor;

impl AttributeExtractor for TemporalityExtractor {
    fn name(&self) -> &'static str {
        "temporality"
    }

    fn attributes(&self) -> &'static [Attribute] {
        use Attribute::*;
        &[Leopard, OeFilt1, OeFilt2, AbRatioL3, AbRatioL2]
    }

    fn extract(&self, ctx: &Context<'_>, pair: Pair, row: &mut FeatureRow) {
        let t = temporal_attributes(ctx, pair);
        row.set(Attribute::Leopard, t.leopard);
        row.set(Attribute::OeFilt1, t.oe_filt1);
        row.set(Attribute::OeFilt2, t.oe_filt2);
        row.set(Attribute::AbRatioL2, t.ab_ratio_l2);
        row.set(Attribute::AbRatioL3, t.ab_ratio_l3);
    }
}

pub struct SpecificityExtractor;

impl AttributeExtractor for SpecificityExtractor {
    fn name(&self) -> &'static str {
        "specificity"
    }

    fn attributes(&self) -> &'static [Attribute] {
        use Attribute::*;
        &[GenderRatio, ReadCodeLevel, RrDrugOverBnf, AgeStdevRatio]
    }

    fn extract(&self, ctx: &Context<'_>, pair: Pair, row: &mut FeatureRow) {
        let s = specificity_attributes(ctx, pair);
        row.set(Attribute::AgeStdevRatio, s.age_stdev_ratio);
        row.set(Attribute::GenderRatio, s.gender_ratio);
        row.set(Attribute::ReadCodeLevel, s.read_code_level);
        row.set(Attribute::RrDrugOverBnf, s.rr_drug_over_bnf);
    }
}

pub struct DosageExtractor;

impl AttributeExtractor for DosageExtractor {
    fn name(&self) -> &'static str {
        "dosage"
    }

    fn attributes(&self) -> &'static [Attribute] {
        use Attribute::*;
        &[Pearson, DosageRatio, HighLowRatio, Spearman]
    }

    fn extract(&self, ctx: &Context<'_>, pair: Pair, row: &mut FeatureRow) {
        let d = dosage_attributes(ctx, pair);
        row.set(Attribute::DosageRatio, d.dosage_ratio);
        row.set(Attribute::HighLowRatio, d.high_low_ratio);
        row.set(Attribute::Spearman, d.spearman);
        row.set(Attribute::Pearson, d.pearson);
    }
}

pub struct ExperimentationExtractor;

impl AttributeExtractor for ExperimentationExtractor {
    fn name(&self) -> &'static str {
        "experimentation"
    }

    fn attributes(&self) -> &'static [Attribute] {
        &[Attribute::Repeat1, Attribute::Repeat2]
    }

    fn extract(&self, ctx: &Context<'_>, pair: Pair, row: &mut FeatureRow) {
        let r = repeats(ctx, pair);
        row.set(Attribute::Repeat1, r.repeat1);
        row.set(Attribute::Repeat2, r.repeat2);
    }
}

/// Extractors by name, in registration order.
#[derive(Default)]
pub struct ExtractorRegistry {
    entries: Vec<Box<dyn AttributeExtractor>>,
}

impl ExtractorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// All five criteria; together they cover the full catalogue.
    pub fn with_defaults() -> Self {
        let mut reg = Self::new();
        reg.register(Box::new(StrengthExtractor));
        reg.register(Box::new(TemporalityExtractor));
        reg.register(Box::new(SpecificityExtractor));
        reg.register(Box::new(DosageExtractor));
        reg.register(Box::new(ExperimentationExtractor));
        reg
    }

    /// Adds an extractor, replacing any existing one with the same name.
    pub fn register(&mut self, extractor: Box<dyn AttributeExtractor>) {
        match self.entries.iter().position(|e| e.name() == extractor.name()) {
            Some(i) => self.entries[i] = extractor,
            None => self.entries.push(extractor),
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn AttributeExtractor> {
        self.entries.iter().find(|e| e.name() == name).map(|e| e.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    /// Keep only the named extractors, in registry order.
    pub fn select(mut self, names: &[impl AsRef<str>]) -> Result<Self> {
        for n in names {
            if self.get(n.as_ref()).is_none() {
                return Err(Error::UnknownExtractor(n.as_ref().to_string()));
            }
        }
        self.entries.retain(|e| names.iter().any(|n| n.as_ref() == e.name()));
        Ok(self)
    }

    /// Union of extractor columns in catalogue order.
    pub fn columns(&self) -> Vec<Attribute> {
        let mut cols: Vec<Attribute> = self
            .entries
            .iter()
            .flat_map(|e| e.attributes().iter().copied())
            .collect();
        cols.sort();
        cols.dedup();
        cols
    }

    pub fn extract(&self, ctx: &Context<'_>, pair: Pair) -> FeatureRow {
        let mut row = FeatureRow::default();
        for e in &self.entries {
            e.extract(ctx, pair, &mut row);
        }
        row
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn AttributeExtractor> {
        self.entries.iter().map(|e| e.as_ref())
    }
}
