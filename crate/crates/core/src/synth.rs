//! Seeded generator of synthetic longitudinal databases with planted
//! drug/event relationships.
//!
//! Prescriptions and background events are Bernoulli-per-day processes,
//! sampled through geometric inter-arrival gaps. Every patient draws from
//! its own ChaCha stream keyed by `(seed, patient index)`, so the output
//! does not depend on how patients are scheduled across threads.
//!
//! Relation effects:
//! - `ADR`: inside the hazard window `[t+1, t+HAZARD_DAYS]` after each
//!   prescription the event's daily rate is
//!   `base * multiplier * (1 + dose_slope * (dose - min) / (max - min))`.
//!   With `recurrence = r`, every challenge episode (prescriptions more than
//!   a year after the previous one) also inserts the event in its hazard
//!   window with probability `r`.
//! - `indicator`: each prescription is preceded, with probability `prob`,
//!   by the event 1 to `INDICATION_DAYS` days earlier.
//! - `noise`: no effect.
//!
//! Config format, one item per line, `#` starts a comment:
//!
//! ```text
//! seed = 7
//! n_patients = 1000
//! observation_days = 1500
//! drug = D01 BNF1 10,20,40 0.002
//! event = H33.. 0.0005
//! relation = D01 H33.. ADR multiplier=5 dose_slope=1 recurrence=0.3
//! relation = D01 G30.. indicator prob=0.8
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use crate::context::DEFAULT_MONTH_DAYS;
use crate::error::{Error, Result};
use crate::experimentation::episode_anchors;
use crate::readcode::ReadCode;
use crate::store::{
    Day, Label, EVENTS_FILE, EVENTS_HEADER, LABELS_FILE, LABELS_HEADER, PATIENTS_FILE, PATIENTS_HEADER,
    PRESCRIPTIONS_FILE, PRESCRIPTIONS_HEADER,
};

pub const HAZARD_DAYS: Day = DEFAULT_MONTH_DAYS;
pub const INDICATION_DAYS: Day = 30;
/// Prescriptions start this many days into observation so indicator
/// events always fit before them.
pub const FIRST_PRESCRIPTION_DAY: Day = INDICATION_DAYS;
pub const BIRTH_YEARS: (i32, i32) = (1930, 1990);

#[derive(Debug, Clone, PartialEq)]
pub struct DrugSpec {
    pub code: String,
    pub bnf: String,
    /// Candidate mg dosages; each patient keeps one for the whole timeline.
    pub dosages: Vec<f64>,
    /// Daily prescription probability.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventSpec {
    pub code: ReadCode,
    /// Daily background probability.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Effect {
    Adr {
        multiplier: f64,
        dose_slope: f64,
        recurrence: f64,
    },
    Indicator {
        prob: f64,
    },
    Noise,
}

impl Effect {
    pub fn label(&self) -> Label {
        match self {
            Effect::Adr { .. } => Label::Adr,
            Effect::Indicator { .. } => Label::Indicator,
            Effect::Noise => Label::Noise,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationSpec {
    pub drug: String,
    pub event: ReadCode,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_patients: usize,
    pub observation_days: Day,
    pub drugs: Vec<DrugSpec>,
    pub events: Vec<EventSpec>,
    pub relations: Vec<RelationSpec>,
}

fn probability(name: &str, v: f64) -> std::result::Result<f64, String> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{name} must be in [0, 1], got {v}"))
    }
}

fn number<T: std::str::FromStr>(name: &str, s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("invalid {name} `{s}`"))
}

impl DrugSpec {
    fn check(&self) -> std::result::Result<(), String> {
        if self.dosages.is_empty() {
            return Err(format!("drug {} needs at least one dosage", self.code));
        }
        if let Some(d) = self.dosages.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(format!("drug {}: dosage must be positive, got {d}", self.code));
        }
        probability("prescription rate", self.rate).map(drop)
    }
}

impl RelationSpec {
    fn check(&self) -> std::result::Result<(), String> {
        match self.effect {
            Effect::Adr {
                multiplier,
                dose_slope,
                recurrence,
            } => {
                if !(multiplier.is_finite() && multiplier >= 1.0) {
                    return Err(format!("multiplier must be >= 1, got {multiplier}"));
                }
                if !(dose_slope.is_finite() && dose_slope >= 0.0) {
                    return Err(format!("dose_slope must be >= 0, got {dose_slope}"));
                }
                probability("recurrence", recurrence).map(drop)
            }
            Effect::Indicator { prob } => probability("prob", prob).map(drop),
            Effect::Noise => Ok(()),
        }
    }
}

fn parse_relation(fields: &[&str]) -> std::result::Result<RelationSpec, String> {
    let [drug, event, kind, options @ ..] = fields else {
        return Err("expected `relation = <drug> <read_code> <kind> [key=value...]`".into());
    };
    let event: ReadCode = event.parse().map_err(|e: Error| e.to_string())?;
    let label: Label = kind.parse()?;
    let mut multiplier = 1.0;
    let mut dose_slope = 0.0;
    let mut recurrence = 0.0;
    let mut prob = 0.0;
    for opt in options {
        let (key, value) = opt
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, found `{opt}`"))?;
        let slot = match (label, key) {
            (Label::Adr, "multiplier") => &mut multiplier,
            (Label::Adr, "dose_slope") => &mut dose_slope,
            (Label::Adr, "recurrence") => &mut recurrence,
            (Label::Indicator, "prob") => &mut prob,
            _ => return Err(format!("option `{key}` does not apply to {label} relations")),
        };
        *slot = number(key, value)?;
    }
    let effect = match label {
        Label::Adr => Effect::Adr {
            multiplier,
            dose_slope,
            recurrence,
        },
        Label::Indicator => Effect::Indicator { prob },
        Label::Noise => Effect::Noise,
    };
    Ok(RelationSpec {
        drug: drug.to_string(),
        event,
        effect,
    })
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut n_patients = None;
        let mut observation_days = None;
        let mut drugs = Vec::new();
        let mut events = Vec::new();
        let mut relations = Vec::new();
        let mut lines_of = (Vec::new(), Vec::new(), Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| Error::Config { line, message };
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let fields: Vec<&str> = value.split_whitespace().collect();
            match key {
                "seed" => seed = Some(number::<u64>(key, value).map_err(err)?),
                "n_patients" => n_patients = Some(number::<usize>(key, value).map_err(err)?),
                "observation_days" => observation_days = Some(number::<Day>(key, value).map_err(err)?),
                "drug" => {
                    let [code, bnf, dosages, rate] = fields[..] else {
                        return Err(err("expected `drug = <code> <bnf> <dosages> <rate>`".into()));
                    };
                    let dosages = dosages
                        .split(',')
                        .map(|d| number::<f64>("dosage", d))
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(err)?;
                    let spec = DrugSpec {
                        code: code.to_string(),
                        bnf: bnf.to_string(),
                        dosages,
                        rate: number(key, rate).map_err(err)?,
                    };
                    spec.check().map_err(err)?;
                    drugs.push(spec);
                    lines_of.0.push(line);
                }
                "event" => {
                    let [code, rate] = fields[..] else {
                        return Err(err("expected `event = <read_code> <rate>`".into()));
                    };
                    let spec = EventSpec {
                        code: code.parse().map_err(|e: Error| err(e.to_string()))?,
                        rate: probability("event rate", number(key, rate).map_err(err)?).map_err(err)?,
                    };
                    events.push(spec);
                    lines_of.1.push(line);
                }
                "relation" => {
                    let spec = parse_relation(&fields).map_err(err)?;
                    spec.check().map_err(err)?;
                    relations.push(spec);
                    lines_of.2.push(line);
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::Config {
            line: 0,
            message: format!("missing `{k}`"),
        };
        let config = ScenarioConfig {
            seed: seed.ok_or_else(|| missing("seed"))?,
            n_patients: n_patients.ok_or_else(|| missing("n_patients"))?,
            observation_days: observation_days.ok_or_else(|| missing("observation_days"))?,
            drugs,
            events,
            relations,
        };
        config.check_references(&lines_of.0, &lines_of.1, &lines_of.2)?;
        Ok(config)
    }

    /// Check field ranges and cross-references.
    pub fn validate(&self) -> Result<()> {
        for d in &self.drugs {
            d.check().map_err(Error::Param)?;
        }
        for e in &self.events {
            probability("event rate", e.rate).map_err(Error::Param)?;
        }
        for r in &self.relations {
            r.check().map_err(Error::Param)?;
        }
        self.check_references(&[], &[], &[])
    }

    fn check_references(&self, drug_lines: &[usize], event_lines: &[usize], relation_lines: &[usize]) -> Result<()> {
        let at = |lines: &[usize], i: usize, message: String| Error::Config {
            line: lines.get(i).copied().unwrap_or(0),
            message,
        };
        if self.n_patients == 0 {
            return Err(Error::Param("n_patients must be positive".into()));
        }
        if self.observation_days <= FIRST_PRESCRIPTION_DAY {
            return Err(Error::Param(format!(
                "observation_days must exceed {FIRST_PRESCRIPTION_DAY}"
            )));
        }
        let mut drug_codes = HashSet::new();
        for (i, d) in self.drugs.iter().enumerate() {
            if !drug_codes.insert(d.code.as_str()) {
                return Err(at(drug_lines, i, format!("drug {} declared twice", d.code)));
            }
        }
        let mut event_codes = HashSet::new();
        for (i, e) in self.events.iter().enumerate() {
            if !event_codes.insert(e.code) {
                return Err(at(event_lines, i, format!("event {} declared twice", e.code)));
            }
        }
        let mut pairs = HashSet::new();
        for (i, r) in self.relations.iter().enumerate() {
            if !drug_codes.contains(r.drug.as_str()) {
                return Err(at(relation_lines, i, format!("unknown drug {}", r.drug)));
            }
            if !event_codes.contains(&r.event) {
                return Err(at(relation_lines, i, format!("unknown event {}", r.event)));
            }
            if !pairs.insert((r.drug.as_str(), r.event)) {
                return Err(at(
                    relation_lines,
                    i,
                    format!("relation {} {} declared twice", r.drug, r.event),
                ));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "seed = {}", self.seed).unwrap();
        writeln!(out, "n_patients = {}", self.n_patients).unwrap();
        writeln!(out, "observation_days = {}", self.observation_days).unwrap();
        for d in &self.drugs {
            let dosages: Vec<String> = d.dosages.iter().map(f64::to_string).collect();
            writeln!(out, "drug = {} {} {} {}", d.code, d.bnf, dosages.join(","), d.rate).unwrap();
        }
        for e in &self.events {
            writeln!(out, "event = {} {}", e.code, e.rate).unwrap();
        }
        for r in &self.relations {
            write!(out, "relation = {} {} {}", r.drug, r.event, r.effect.label()).unwrap();
            match r.effect {
                Effect::Adr {
                    multiplier,
                    dose_slope,
                    recurrence,
                } => write!(
                    out,
                    " multiplier={multiplier} dose_slope={dose_slope} recurrence={recurrence}"
                )
                .unwrap(),
                Effect::Indicator { prob } => write!(out, " prob={prob}").unwrap(),
                Effect::Noise => {}
            }
            out.push('\n');
        }
        out
    }
}

/// Generated CSV contents, one string per file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthFiles {
    pub patients: String,
    pub prescriptions: String,
    pub events: String,
    pub labels: String,
}

impl SynthFiles {
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, body) in [
            (PATIENTS_FILE, &self.patients),
            (PRESCRIPTIONS_FILE, &self.prescriptions),
            (EVENTS_FILE, &self.events),
            (LABELS_FILE, &self.labels),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(&path))?;
        }
        Ok(())
    }
}

/// Days `start..end` sampled as independent Bernoulli(`p`) trials.
fn bernoulli_days(rng: &mut ChaCha8Rng, p: f64, start: Day, end: Day, out: &mut Vec<Day>) {
    if p <= 0.0 || start >= end {
        return;
    }
    let gaps = Geometric::new(p).expect("probability checked at validation");
    let mut day = i64::from(start);
    loop {
        day += gaps.sample(rng).min(i64::MAX as u64 / 2) as i64;
        if day >= i64::from(end) {
            return;
        }
        out.push(day as Day);
        day += 1;
    }
}

struct PatientDraw {
    gender: &'static str,
    birth_year: i32,
    /// Per drug: dosage and sorted prescription days.
    prescriptions: Vec<(f64, Vec<Day>)>,
    /// Per event: sorted distinct days.
    events: Vec<Vec<Day>>,
}

struct Boost {
    start: Day,
    end: Day,
    factor: f64,
}

fn draw_patient(config: &ScenarioConfig, index: usize) -> PatientDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let obs = config.observation_days;
    let gender = if rng.gen_bool(0.5) { "M" } else { "F" };
    let birth_year = rng.gen_range(BIRTH_YEARS.0..=BIRTH_YEARS.1);

    let prescriptions: Vec<(f64, Vec<Day>)> = config
        .drugs
        .iter()
        .map(|d| {
            let dose = d.dosages[rng.gen_range(0..d.dosages.len())];
            let mut days = Vec::new();
            bernoulli_days(&mut rng, d.rate, FIRST_PRESCRIPTION_DAY, obs, &mut days);
            (dose, days)
        })
        .collect();

    let drug_ix = |code: &str| config.drugs.iter().position(|d| d.code == code).unwrap();
    let events = config
        .events
        .iter()
        .map(|e| {
            let mut boosts = Vec::new();
            let mut extra = Vec::new();
            for r in config.relations.iter().filter(|r| r.event == e.code) {
                let di = drug_ix(&r.drug);
                let (dose, days) = &prescriptions[di];
                match r.effect {
                    Effect::Adr {
                        multiplier,
                        dose_slope,
                        recurrence,
                    } => {
                        let spec = &config.drugs[di];
                        let (lo, hi) = spec
                            .dosages
                            .iter()
                            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                                (lo.min(d), hi.max(d))
                            });
                        let scaled = if hi > lo { (dose - lo) / (hi - lo) } else { 0.0 };
                        let factor = multiplier * (1.0 + dose_slope * scaled);
                        boosts.extend(days.iter().map(|&t| Boost {
                            start: t + 1,
                            end: t + HAZARD_DAYS + 1,
                            factor,
                        }));
                        for anchor in episode_anchors(days) {
                            if rng.gen_bool(recurrence) {
                                extra.push(anchor + rng.gen_range(1..=HAZARD_DAYS));
                            }
                        }
                    }
                    Effect::Indicator { prob } => {
                        for &t in days {
                            if rng.gen_bool(prob) {
                                extra.push(t - rng.gen_range(1..=INDICATION_DAYS));
                            }
                        }
                    }
                    Effect::Noise => {}
                }
            }
            let mut out = sample_boosted(&mut rng, e.rate, &boosts, obs);
            out.extend(extra.into_iter().filter(|&d| d < obs));
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();

    PatientDraw {
        gender,
        birth_year,
        prescriptions,
        events,
    }
}

/// Event days over `0..obs` with daily rate `base`, raised to
/// `base * factor` (largest factor wins) inside boosted ranges.
fn sample_boosted(rng: &mut ChaCha8Rng, base: f64, boosts: &[Boost], obs: Day) -> Vec<Day> {
    let mut cuts: Vec<Day> = vec![0, obs];
    for b in boosts {
        cuts.push(b.start.clamp(0, obs));
        cuts.push(b.end.clamp(0, obs));
    }
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::new();
    for seg in cuts.windows(2) {
        let (start, end) = (seg[0], seg[1]);
        let factor = boosts
            .iter()
            .filter(|b| b.start <= start && start < b.end)
            .map(|b| b.factor)
            .fold(1.0, f64::max);
        bernoulli_days(rng, (base * factor).min(1.0), start, end, &mut out);
    }
    out
}

fn patient_id(index: usize, width: usize) -> String {
    format!("P{:0width$}", index + 1)
}

/// Generate the four database files. Identical configs give identical bytes.
pub fn generate(config: &ScenarioConfig) -> Result<SynthFiles> {
    config.validate()?;
    let width = config.n_patients.to_string().len();
    let chunks: Vec<(String, String, String)> = (0..config.n_patients)
        .into_par_iter()
        .map(|i| {
            let draw = draw_patient(config, i);
            let id = patient_id(i, width);
            let patient = format!("{id},{},{}\n", draw.gender, draw.birth_year);
            let mut rx: Vec<(Day, usize)> = draw
                .prescriptions
                .iter()
                .enumerate()
                .flat_map(|(di, (_, days))| days.iter().map(move |&d| (d, di)))
                .collect();
            rx.sort_unstable();
            let mut rx_text = String::new();
            for (day, di) in rx {
                let drug = &config.drugs[di];
                let dose = draw.prescriptions[di].0;
                writeln!(rx_text, "{id},{day},{},{},{dose},mg", drug.code, drug.bnf).unwrap();
            }
            let mut ev: Vec<(Day, usize)> = draw
                .events
                .iter()
                .enumerate()
                .flat_map(|(ei, days)| days.iter().map(move |&d| (d, ei)))
                .collect();
            ev.sort_unstable();
            let mut ev_text = String::new();
            for (day, ei) in ev {
                writeln!(ev_text, "{id},{day},{}", config.events[ei].code).unwrap();
            }
            (patient, rx_text, ev_text)
        })
        .collect();

    let mut files = SynthFiles {
        patients: format!("{PATIENTS_HEADER}\n"),
        prescriptions: format!("{PRESCRIPTIONS_HEADER}\n"),
        events: format!("{EVENTS_HEADER}\n"),
        labels: format!("{LABELS_HEADER}\n"),
    };
    for (p, rx, ev) in chunks {
        files.patients.push_str(&p);
        files.prescriptions.push_str(&rx);
        files.events.push_str(&ev);
    }
    for r in &config.relations {
        writeln!(files.labels, "{},{},{}", r.drug, r.event, r.effect.label()).unwrap();
    }
    Ok(files)
}
