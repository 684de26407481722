#![allow(dead_code)]

//! Naive reference implementations over raw rows, plus fixtures shared by
//! the integration targets.

use adrcause::store::{EventRow, Gender, LabelledPair, PatientRecord, PrescriptionRow};
use adrcause::synth::{DrugSpec, Effect, EventSpec, RelationSpec};
use adrcause::{Database, Label, ReadCode, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MONTH: i32 = 30;
pub const LOOKBACK: i32 = 395;
pub const YEAR_GAP: i32 = 365;

#[derive(Debug, Clone)]
pub struct RawRx {
    pub patient: usize,
    pub date: i32,
    pub drug: String,
    pub bnf: String,
    pub dose: Option<f64>,
    pub unit: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RawEvent {
    pub patient: usize,
    pub date: i32,
    pub code: String,
}

#[derive(Debug, Clone)]
pub struct RawDb {
    pub patients: Vec<(Gender, i32)>,
    /// File order.
    pub rx: Vec<RawRx>,
    pub events: Vec<RawEvent>,
    pub drugs: Vec<String>,
    pub codes: Vec<String>,
}

pub const CODE_POOL: [&str; 8] = ["H33..", "H33a.", "H33ab", "H3...", "H34..", "G30..", "G3...", "H...."];
const DRUG_POOL: [(&str, &str); 4] = [("D1", "B1"), ("D2", "B1"), ("D3", "B2"), ("D4", "B3")];

/// Random database with at most `max_records` prescriptions plus events.
/// Dates cluster so windows and lookbacks are exercised at their edges.
pub fn random_raw(seed: u64, max_records: usize) -> RawDb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_patients = rng.gen_range(1..=25);
    let patients = (0..n_patients)
        .map(|_| {
            let g = if rng.gen_bool(0.5) {
                Gender::Male
            } else {
                Gender::Female
            };
            (g, rng.gen_range(1940..1990))
        })
        .collect();
    let n_records = rng.gen_range(1..=max_records);
    let horizon = rng.gen_range(60..1600);
    let mut rx = Vec::new();
    let mut events = Vec::new();
    for _ in 0..n_records {
        let patient = rng.gen_range(0..n_patients);
        let date = rng.gen_range(0..horizon);
        if rng.gen_bool(0.5) {
            let (drug, bnf) = DRUG_POOL[rng.gen_range(0..DRUG_POOL.len())];
            let (dose, unit) = match rng.gen_range(0..4) {
                0 => (None, None),
                1 => (Some(f64::from(rng.gen_range(1..4)) * 10.0), Some("%".to_string())),
                2 => (Some(f64::from(rng.gen_range(1..4)) * 10.0), Some(" MG ".to_string())),
                _ => (Some(f64::from(rng.gen_range(1..4)) * 10.0), Some("mg".to_string())),
            };
            rx.push(RawRx {
                patient,
                date,
                drug: drug.into(),
                bnf: bnf.into(),
                dose,
                unit,
            });
        } else {
            events.push(RawEvent {
                patient,
                date,
                code: CODE_POOL[rng.gen_range(0..CODE_POOL.len())].into(),
            });
        }
    }
    let mut drugs: Vec<String> = rx.iter().map(|r| r.drug.clone()).collect();
    drugs.sort();
    drugs.dedup();
    RawDb {
        patients,
        rx,
        events,
        drugs,
        codes: CODE_POOL.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn patient_id(i: usize) -> String {
    format!("P{i}")
}

/// Every (drug, code) combination is labelled so all pairs resolve.
pub fn to_database(raw: &RawDb) -> Database {
    let patients = raw
        .patients
        .iter()
        .enumerate()
        .map(|(i, &(gender, birth_year))| PatientRecord {
            patient_id: patient_id(i),
            gender,
            birth_year,
        })
        .collect();
    let rx = raw
        .rx
        .iter()
        .map(|r| PrescriptionRow {
            patient_id: patient_id(r.patient),
            date: r.date,
            drug_code: r.drug.clone(),
            bnf_code: r.bnf.clone(),
            dosage_value: r.dose,
            dosage_unit: r.unit.clone(),
        })
        .collect();
    let events = raw
        .events
        .iter()
        .map(|e| EventRow {
            patient_id: patient_id(e.patient),
            date: e.date,
            read_code: e.code.parse().unwrap(),
        })
        .collect();
    let mut labels = Vec::new();
    for d in &raw.drugs {
        for c in &raw.codes {
            labels.push(LabelledPair {
                drug_code: d.clone(),
                read_code: c.parse().unwrap(),
                label: Label::Noise,
            });
        }
    }
    Database::from_records(patients, rx, events, labels).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawCriterion {
    All,
    Drug,
    Bnf,
}

/// Qualifies unless an earlier same-key prescription (by date, then file
/// order) lies less than the lookback before it.
pub fn qualifies(raw: &RawDb, i: usize, crit: RawCriterion) -> bool {
    let r = &raw.rx[i];
    if crit == RawCriterion::All {
        return true;
    }
    !raw.rx.iter().enumerate().any(|(j, o)| {
        let same_key = o.patient == r.patient
            && match crit {
                RawCriterion::Drug => o.drug == r.drug,
                _ => o.bnf == r.bnf,
            };
        let earlier = (o.date, j) < (r.date, i);
        same_key && earlier && r.date - o.date < LOOKBACK
    })
}

pub fn event_in(raw: &RawDb, patient: usize, code: &str, lo: i32, hi: i32) -> bool {
    raw.events
        .iter()
        .any(|e| e.patient == patient && e.code == code && lo <= e.date && e.date <= hi)
}

/// `(a, b, c, d)` with exposure decided by `exposed`, window offsets
/// `[start, end]` around each qualifying prescription.
pub fn table(
    raw: &RawDb,
    code: &str,
    crit: RawCriterion,
    start: i32,
    end: i32,
    exposed: impl Fn(&RawRx) -> bool,
) -> (u64, u64, u64, u64) {
    let (mut a, mut b, mut c, mut d) = (0, 0, 0, 0);
    for (i, r) in raw.rx.iter().enumerate() {
        if !qualifies(raw, i, crit) {
            continue;
        }
        let hit = event_in(raw, r.patient, code, r.date + start, r.date + end);
        match (exposed(r), hit) {
            (true, true) => a += 1,
            (true, false) => b += 1,
            (false, true) => c += 1,
            (false, false) => d += 1,
        }
    }
    (a, b, c, d)
}

/// String truncation of a dotted code to `level` significant characters.
pub fn rollup_str(code: &str, level: usize) -> String {
    let significant = code.trim_end_matches('.');
    if significant.len() <= level {
        return code.to_string();
    }
    format!("{:.<5}", &significant[..level])
}

pub fn ab_counts(raw: &RawDb, drug: &str, code: &str, level: usize) -> (u64, u64) {
    let target = rollup_str(code, level);
    let matches = |patient: usize, lo: i32, hi: i32| {
        raw.events
            .iter()
            .any(|e| e.patient == patient && lo <= e.date && e.date <= hi && rollup_str(&e.code, level) == target)
    };
    let (mut after, mut before) = (0, 0);
    for r in raw.rx.iter().filter(|r| r.drug == drug) {
        after += u64::from(matches(r.patient, r.date + 1, r.date + MONTH));
        before += u64::from(matches(r.patient, r.date - MONTH, r.date - 1));
    }
    (after, before)
}

pub fn leopard_counts(raw: &RawDb, drug: &str, code: &str) -> (u64, u64) {
    let (mut before, mut after) = (0, 0);
    for p in 0..raw.patients.len() {
        let Some(first) = raw
            .events
            .iter()
            .filter(|e| e.patient == p && e.code == code)
            .map(|e| e.date)
            .min()
        else {
            continue;
        };
        for r in raw.rx.iter().filter(|r| r.patient == p && r.drug == drug) {
            let off = r.date - first;
            if (-MONTH..=-1).contains(&off) {
                before += 1;
            }
            if (1..=MONTH).contains(&off) {
                after += 1;
            }
        }
    }
    (before, after)
}

/// `(rechallenge_positive, single_challenge, non_hazard_events, repeat_patients)`.
pub fn repeat_counts(raw: &RawDb, drug: &str, code: &str) -> (u64, u64, u64, u64) {
    let (mut n2, mut n1, mut m, mut repeaters) = (0, 0, 0, 0);
    for p in 0..raw.patients.len() {
        let mut dates: Vec<i32> = raw
            .rx
            .iter()
            .filter(|r| r.patient == p && r.drug == drug)
            .map(|r| r.date)
            .collect();
        dates.sort();
        let anchors: Vec<i32> = dates
            .iter()
            .enumerate()
            .filter(|&(k, &d)| k == 0 || d - dates[k - 1] > YEAR_GAP)
            .map(|(_, &d)| d)
            .collect();
        if anchors.len() < 2 {
            continue;
        }
        repeaters += 1;
        let mut hazard = 0;
        let mut background = 0;
        for &t in &anchors {
            hazard += u64::from(event_in(raw, p, code, t + 1, t + MONTH));
            background += raw
                .events
                .iter()
                .filter(|e| e.patient == p && e.code == code && e.date >= t - (YEAR_GAP - MONTH) && e.date < t)
                .count() as u64;
        }
        m += background;
        if background == 0 {
            match hazard {
                0 => {}
                1 => n1 += 1,
                _ => n2 += 1,
            }
        }
    }
    (n2, n1, m, repeaters)
}

pub fn read(code: &str) -> ReadCode {
    code.parse().unwrap()
}

/// Planted-signal scenario: twenty drugs in five families, ten ADR pairs,
/// ten indicator pairs and twenty noise pairs, half of which reuse an ADR
/// event of another drug.
pub fn planted_scenario(seed: u64, n_patients: usize) -> ScenarioConfig {
    let chapters = b"ABCDEFGHJK";
    let codes: Vec<ReadCode> = (0..40)
        .map(|i| {
            let s = format!(
                "{}{}{}{}.",
                chapters[i % 10] as char,
                (i / 10) % 4 + 1,
                i % 3 + 1,
                if i % 2 == 1 { 'a' } else { '.' }
            );
            s.parse().unwrap()
        })
        .collect();
    let drug = |i: usize| format!("D{:02}", i + 1);
    let drugs = (0..20)
        .map(|i| DrugSpec {
            code: drug(i),
            bnf: format!("B{}", i / 4 + 1),
            dosages: vec![10.0, 20.0, 40.0],
            rate: 0.002,
        })
        .collect();
    let events = codes.iter().map(|&code| EventSpec { code, rate: 0.0003 }).collect();
    let mut relations = Vec::new();
    for i in 0..10 {
        relations.push(RelationSpec {
            drug: drug(i),
            event: codes[i],
            effect: Effect::Adr {
                multiplier: 5.0,
                dose_slope: 0.0,
                recurrence: 0.0,
            },
        });
        relations.push(RelationSpec {
            drug: drug(i + 10),
            event: codes[i + 10],
            effect: Effect::Indicator { prob: 0.8 },
        });
    }
    for k in 0..20 {
        let event = if k < 10 {
            codes[20 + k]
        } else {
            codes[(k - 10 + 3) % 10]
        };
        relations.push(RelationSpec {
            drug: drug(k),
            event,
            effect: Effect::Noise,
        });
    }
    ScenarioConfig {
        seed,
        n_patients,
        observation_days: 1500,
        drugs,
        events,
        relations,
    }
}

/// One drug, one event, a planted ADR with the given dose slope.
pub fn dose_scenario(seed: u64, n_patients: usize, dose_slope: f64) -> ScenarioConfig {
    ScenarioConfig {
        seed,
        n_patients,
        observation_days: 1000,
        drugs: vec![DrugSpec {
            code: "D1".into(),
            bnf: "B1".into(),
            dosages: vec![10.0, 20.0, 40.0],
            rate: 0.003,
        }],
        events: vec![EventSpec {
            code: read("H33.."),
            rate: 0.0005,
        }],
        relations: vec![RelationSpec {
            drug: "D1".into(),
            event: read("H33.."),
            effect: Effect::Adr {
                multiplier: 3.0,
                dose_slope,
                recurrence: 0.0,
            },
        }],
    }
}

/// Compare every counting routine against the naive scans for every
/// (drug, code) combination. Returns the number of integer comparisons.
pub fn check_counts(raw: &RawDb) -> Result<usize, String> {
    use adrcause::association::{build_bnf_table, build_table, build_table_in, ContingencyTable, Pair};
    use adrcause::context::Window;
    use adrcause::store::Criterion;
    use adrcause::{experimentation, temporality, Context, Params};

    let db = to_database(raw);
    let ctx = Context::new(&db, Params::default()).map_err(|e| e.to_string())?;
    let mut compared = 0;
    let mut expect = |what: String, got: (u64, u64, u64, u64), want: (u64, u64, u64, u64)| {
        compared += 4;
        if got == want {
            Ok(())
        } else {
            Err(format!("{what}: library {got:?}, oracle {want:?}"))
        }
    };
    let cells = |t: ContingencyTable| (t.a, t.b, t.c, t.d);
    for drug in &raw.drugs {
        let bnf = raw.rx.iter().find(|r| &r.drug == drug).unwrap().bnf.clone();
        for code in &raw.codes {
            let pair = Pair::resolve(&ctx, drug, &read(code)).map_err(|e| e.to_string())?;
            for (crit, raw_crit) in [
                (Criterion::All, RawCriterion::All),
                (Criterion::FirstInLookbackDrug, RawCriterion::Drug),
                (Criterion::FirstInLookbackBnf, RawCriterion::Bnf),
            ] {
                expect(
                    format!("table {drug} {code} {crit:?}"),
                    cells(build_table(&ctx, pair, crit)),
                    table(raw, code, raw_crit, 1, MONTH, |r| &r.drug == drug),
                )?;
            }
            for (start, end) in [(-MONTH, -1), (0, 0)] {
                expect(
                    format!("table {drug} {code} window [{start}, {end}]"),
                    cells(build_table_in(&ctx, pair, Criterion::All, Window::new(start, end))),
                    table(raw, code, RawCriterion::All, start, end, |r| &r.drug == drug),
                )?;
            }
            expect(
                format!("bnf table {drug} {code}"),
                cells(build_bnf_table(&ctx, pair)),
                table(raw, code, RawCriterion::All, 1, MONTH, |r| r.bnf == bnf),
            )?;
            for level in [2u8, 3] {
                let got = temporality::ab_counts(&ctx, pair, level).map_err(|e| e.to_string())?;
                let want = ab_counts(raw, drug, code, level.into());
                expect(
                    format!("ab counts {drug} {code} level {level}"),
                    (got.0, got.1, 0, 0),
                    (want.0, want.1, 0, 0),
                )?;
            }
            let got = temporality::leopard_counts(&ctx, pair);
            let want = leopard_counts(raw, drug, code);
            expect(
                format!("leopard counts {drug} {code}"),
                (got.0, got.1, 0, 0),
                (want.0, want.1, 0, 0),
            )?;
            let r = experimentation::repeat_counts(&ctx, pair);
            expect(
                format!("repeat counts {drug} {code}"),
                (
                    r.rechallenge_positive,
                    r.single_challenge,
                    r.non_hazard_events,
                    r.repeat_patients,
                ),
                repeat_counts(raw, drug, code),
            )?;
        }
    }
    Ok(compared)
}
