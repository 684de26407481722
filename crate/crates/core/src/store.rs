//! Immutable in-memory longitudinal database.
//!
//! Records are ingested from four CSV files, validated for referential
//! integrity, and indexed into per-patient timelines sorted by date plus a
//! per-code occurrence index used by the attribute computations.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::readcode::ReadCode;

/// Integer day offset from a fixed epoch.
pub type Day = i32;

/// Calendar year of day 0.
pub const EPOCH_YEAR: i32 = 2000;

pub const PATIENTS_FILE: &str = "patients.csv";
pub const PRESCRIPTIONS_FILE: &str = "prescriptions.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const LABELS_FILE: &str = "labels.csv";

pub const PATIENTS_HEADER: &str = "patient_id,gender,birth_year";
pub const PRESCRIPTIONS_HEADER: &str = "patient_id,date,drug_code,bnf_code,dosage_value,dosage_unit";
pub const EVENTS_HEADER: &str = "patient_id,date,read_code";
pub const LABELS_HEADER: &str = "drug_code,read_code,label";

pub fn year_of(day: Day) -> i32 {
    EPOCH_YEAR + (f64::from(day) / 365.25).floor() as i32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn code(self) -> &'static str {
        match self {
            Gender::Male => "M",
            Gender::Female => "F",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub patient_id: String,
    pub gender: Gender,
    pub birth_year: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DrugId(u32);

impl DrugId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BnfId(u32);

impl BnfId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prescription {
    /// Index into [`Database::patients`].
    pub patient: usize,
    pub date: Day,
    pub drug: DrugId,
    pub bnf: BnfId,
    pub dosage_value: Option<f64>,
    pub dosage_unit: Option<String>,
}

impl Prescription {
    /// Dosage when recorded in milligrams (unit compared trimmed, case-insensitive).
    pub fn mg_dosage(&self) -> Option<f64> {
        let unit = self.dosage_unit.as_deref()?;
        if unit.trim().eq_ignore_ascii_case("mg") {
            self.dosage_value
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventRecord {
    pub patient: usize,
    pub date: Day,
    pub read_code: ReadCode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Adr,
    Indicator,
    Noise,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Adr, Label::Indicator, Label::Noise];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Adr => "ADR",
            Label::Indicator => "indicator",
            Label::Noise => "noise",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ADR" => Ok(Label::Adr),
            "indicator" => Ok(Label::Indicator),
            "noise" => Ok(Label::Noise),
            other => Err(format!("label `{other}` not one of ADR, indicator, noise")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledPair {
    pub drug_code: String,
    pub read_code: ReadCode,
    pub label: Label,
}

/// Filter applied to prescriptions before they enter a contingency table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    All,
    /// No prescription of the same drug for the patient within the lookback.
    FirstInLookbackDrug,
    /// No prescription of the same BNF family for the patient within the lookback.
    FirstInLookbackBnf,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [
        Criterion::All,
        Criterion::FirstInLookbackDrug,
        Criterion::FirstInLookbackBnf,
    ];

    pub(crate) fn slot(self) -> usize {
        match self {
            Criterion::All => 0,
            Criterion::FirstInLookbackDrug => 1,
            Criterion::FirstInLookbackBnf => 2,
        }
    }
}

// Raw rows as they appear in the input files, before interning.

#[derive(Debug, Clone, PartialEq)]
pub struct PrescriptionRow {
    pub patient_id: String,
    pub date: Day,
    pub drug_code: String,
    pub bnf_code: String,
    pub dosage_value: Option<f64>,
    pub dosage_unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub patient_id: String,
    pub date: Day,
    pub read_code: ReadCode,
}

/// Sorted occurrence dates of one code, grouped by patient (CSR layout).
#[derive(Debug, Default)]
pub struct CodeOccurrences {
    patients: Vec<usize>,
    offsets: Vec<usize>,
    dates: Vec<Day>,
}

impl CodeOccurrences {
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[Day])> + '_ {
        self.patients
            .iter()
            .enumerate()
            .map(move |(i, &p)| (p, &self.dates[self.offsets[i]..self.offsets[i + 1]]))
    }

    pub fn dates_for(&self, patient: usize) -> &[Day] {
        match self.patients.binary_search(&patient) {
            Ok(i) => &self.dates[self.offsets[i]..self.offsets[i + 1]],
            Err(_) => &[],
        }
    }

    pub fn patient_count(&self) -> usize {
        self.patients.len()
    }

    fn push(&mut self, patient: usize, date: Day) {
        if self.patients.last() != Some(&patient) {
            if self.offsets.is_empty() {
                self.offsets.push(0);
            }
            self.patients.push(patient);
            self.offsets.push(self.dates.len());
        }
        self.dates.push(date);
        *self.offsets.last_mut().unwrap() = self.dates.len();
    }
}

/// True when some date in the sorted slice lies in `[lo, hi]`.
pub(crate) fn any_in(sorted: &[Day], lo: Day, hi: Day) -> bool {
    let i = sorted.partition_point(|&d| d < lo);
    i < sorted.len() && sorted[i] <= hi
}

pub(crate) fn count_in(sorted: &[Day], lo: Day, hi: Day) -> usize {
    let start = sorted.partition_point(|&d| d < lo);
    let end = sorted.partition_point(|&d| d <= hi);
    end.saturating_sub(start)
}

#[derive(Debug)]
pub struct Database {
    patients: Vec<PatientRecord>,
    patient_index: HashMap<String, usize>,
    prescriptions: Vec<Prescription>,
    events: Vec<EventRecord>,
    labels: Vec<LabelledPair>,
    rx_by_patient: Vec<Range<usize>>,
    events_by_patient: Vec<Range<usize>>,
    drug_codes: Vec<String>,
    drug_lookup: HashMap<String, DrugId>,
    drug_rx: Vec<Vec<usize>>,
    drug_bnf: Vec<BnfId>,
    bnf_codes: Vec<String>,
    code_index: HashMap<ReadCode, CodeOccurrences>,
    label_codes: BTreeSet<ReadCode>,
}

impl Database {
    /// Ingest the four standard files from a directory.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        Self::ingest(
            dir.join(PATIENTS_FILE),
            dir.join(PRESCRIPTIONS_FILE),
            dir.join(EVENTS_FILE),
            dir.join(LABELS_FILE),
        )
    }

    pub fn ingest(
        patients_file: impl AsRef<Path>,
        prescriptions_file: impl AsRef<Path>,
        events_file: impl AsRef<Path>,
        labels_file: impl AsRef<Path>,
    ) -> Result<Self> {
        fn open(path: &Path) -> Result<File> {
            File::open(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        let name = |p: &Path| p.display().to_string();
        let (p, r, e, l) = (
            patients_file.as_ref(),
            prescriptions_file.as_ref(),
            events_file.as_ref(),
            labels_file.as_ref(),
        );
        let patients = parse_patients(open(p)?, &name(p))?;
        let prescriptions = parse_prescriptions(open(r)?, &name(r))?;
        let events = parse_events(open(e)?, &name(e))?;
        let labels = parse_labels(open(l)?, &name(l))?;
        Self::build(
            (name(p), patients),
            (name(r), prescriptions),
            (name(e), events),
            (name(l), labels),
        )
    }

    /// Ingest from in-memory CSV text, mainly for tests.
    pub fn from_csv_strs(patients: &str, prescriptions: &str, events: &str, labels: &str) -> Result<Self> {
        Self::build(
            (
                PATIENTS_FILE.into(),
                parse_patients(patients.as_bytes(), PATIENTS_FILE)?,
            ),
            (
                PRESCRIPTIONS_FILE.into(),
                parse_prescriptions(prescriptions.as_bytes(), PRESCRIPTIONS_FILE)?,
            ),
            (EVENTS_FILE.into(), parse_events(events.as_bytes(), EVENTS_FILE)?),
            (LABELS_FILE.into(), parse_labels(labels.as_bytes(), LABELS_FILE)?),
        )
    }

    /// Build from already-parsed rows. Line numbers in errors count the
    /// header as line 1, as if the rows had been read from files.
    pub fn from_records(
        patients: Vec<PatientRecord>,
        prescriptions: Vec<PrescriptionRow>,
        events: Vec<EventRow>,
        labels: Vec<LabelledPair>,
    ) -> Result<Self> {
        let numbered = |n: usize| (2..).take(n);
        let patients = numbered(patients.len()).zip(patients).collect();
        let prescriptions = numbered(prescriptions.len()).zip(prescriptions).collect();
        let events = numbered(events.len()).zip(events).collect();
        let labels = numbered(labels.len()).zip(labels).collect();
        Self::build(
            (PATIENTS_FILE.into(), patients),
            (PRESCRIPTIONS_FILE.into(), prescriptions),
            (EVENTS_FILE.into(), events),
            (LABELS_FILE.into(), labels),
        )
    }

    fn build(
        (patients_name, patients): (String, Vec<(u64, PatientRecord)>),
        (rx_name, rx_rows): (String, Vec<(u64, PrescriptionRow)>),
        (ev_name, ev_rows): (String, Vec<(u64, EventRow)>),
        (label_name, label_rows): (String, Vec<(u64, LabelledPair)>),
    ) -> Result<Self> {
        let mut patient_index = HashMap::with_capacity(patients.len());
        let mut patient_list = Vec::with_capacity(patients.len());
        for (line, rec) in patients {
            if patient_index.contains_key(&rec.patient_id) {
                return Err(Error::DuplicatePatient {
                    file: patients_name,
                    line,
                    id: rec.patient_id,
                });
            }
            patient_index.insert(rec.patient_id.clone(), patient_list.len());
            patient_list.push(rec);
        }

        let resolve = |file: &str, line: u64, id: &str, date: Day| -> Result<usize> {
            let ix = *patient_index.get(id).ok_or_else(|| Error::UnknownPatient {
                file: file.to_string(),
                line,
                id: id.to_string(),
            })?;
            if year_of(date) < patient_list[ix].birth_year {
                return Err(Error::row(
                    file,
                    line,
                    format!("record dated before birth year of patient `{id}`"),
                ));
            }
            Ok(ix)
        };

        let drug_codes: Vec<String> = rx_rows
            .iter()
            .map(|(_, r)| r.drug_code.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let drug_lookup: HashMap<String, DrugId> = drug_codes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), DrugId(i as u32)))
            .collect();
        let bnf_codes: Vec<String> = rx_rows
            .iter()
            .map(|(_, r)| r.bnf_code.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let bnf_lookup: HashMap<&str, BnfId> = bnf_codes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), BnfId(i as u32)))
            .collect();

        let mut prescriptions = Vec::with_capacity(rx_rows.len());
        for (line, row) in rx_rows {
            let patient = resolve(&rx_name, line, &row.patient_id, row.date)?;
            if row.dosage_value.is_some_and(|v| !(v >= 0.0 && v.is_finite())) {
                return Err(Error::row(
                    &rx_name,
                    line,
                    "dosage_value must be a finite nonnegative number",
                ));
            }
            prescriptions.push(Prescription {
                patient,
                date: row.date,
                drug: drug_lookup[&row.drug_code],
                bnf: bnf_lookup[row.bnf_code.as_str()],
                dosage_value: row.dosage_value,
                dosage_unit: row.dosage_unit,
            });
        }
        // stable: same-day records keep file order
        prescriptions.sort_by_key(|p| (p.patient, p.date));

        let mut events = Vec::with_capacity(ev_rows.len());
        for (line, row) in ev_rows {
            let patient = resolve(&ev_name, line, &row.patient_id, row.date)?;
            events.push(EventRecord {
                patient,
                date: row.date,
                read_code: row.read_code,
            });
        }
        events.sort_by_key(|e| (e.patient, e.date));

        let mut labels = Vec::with_capacity(label_rows.len());
        let mut seen_pairs = BTreeSet::new();
        for (line, pair) in label_rows {
            if !drug_lookup.contains_key(&pair.drug_code) {
                return Err(Error::row(
                    &label_name,
                    line,
                    format!("label references unknown drug `{}`", pair.drug_code),
                ));
            }
            if !seen_pairs.insert((pair.drug_code.clone(), pair.read_code)) {
                return Err(Error::row(
                    &label_name,
                    line,
                    format!("pair ({}, {}) labelled twice", pair.drug_code, pair.read_code),
                ));
            }
            labels.push(pair);
        }

        let rx_by_patient = ranges_by_patient(prescriptions.iter().map(|p| p.patient), patient_list.len());
        let events_by_patient = ranges_by_patient(events.iter().map(|e| e.patient), patient_list.len());

        let mut drug_rx = vec![Vec::new(); drug_codes.len()];
        for (i, p) in prescriptions.iter().enumerate() {
            drug_rx[p.drug.index()].push(i);
        }
        let drug_bnf = drug_rx
            .iter()
            .map(|rx| {
                let mut counts: HashMap<BnfId, usize> = HashMap::new();
                for &i in rx {
                    *counts.entry(prescriptions[i].bnf).or_default() += 1;
                }
                // most frequent family; lowest id on ties
                counts
                    .into_iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
                    .map(|(b, _)| b)
                    .expect("every interned drug has a prescription")
            })
            .collect();

        let mut code_index: HashMap<ReadCode, CodeOccurrences> = HashMap::new();
        for e in &events {
            code_index.entry(e.read_code).or_default().push(e.patient, e.date);
        }
        let label_codes = labels.iter().map(|l| l.read_code).collect();

        Ok(Database {
            patients: patient_list,
            patient_index,
            prescriptions,
            events,
            labels,
            rx_by_patient,
            events_by_patient,
            drug_codes,
            drug_lookup,
            drug_rx,
            drug_bnf,
            bnf_codes,
            code_index,
            label_codes,
        })
    }

    pub fn patients(&self) -> &[PatientRecord] {
        &self.patients
    }

    pub fn patient(&self, ix: usize) -> &PatientRecord {
        &self.patients[ix]
    }

    pub fn patient_ix(&self, patient_id: &str) -> Option<usize> {
        self.patient_index.get(patient_id).copied()
    }

    /// All prescriptions, sorted by patient then date.
    pub fn prescriptions(&self) -> &[Prescription] {
        &self.prescriptions
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn labels(&self) -> &[LabelledPair] {
        &self.labels
    }

    pub fn patient_prescriptions(&self, patient: usize) -> &[Prescription] {
        &self.prescriptions[self.rx_by_patient[patient].clone()]
    }

    pub(crate) fn patient_rx_range(&self, patient: usize) -> Range<usize> {
        self.rx_by_patient[patient].clone()
    }

    pub fn patient_events(&self, patient: usize) -> &[EventRecord] {
        &self.events[self.events_by_patient[patient].clone()]
    }

    pub fn drug_codes(&self) -> &[String] {
        &self.drug_codes
    }

    pub fn drug_id(&self, drug_code: &str) -> Result<DrugId> {
        self.drug_lookup
            .get(drug_code)
            .copied()
            .ok_or_else(|| Error::UnknownDrug(drug_code.to_string()))
    }

    pub fn drug_code(&self, drug: DrugId) -> &str {
        &self.drug_codes[drug.index()]
    }

    /// The BNF family a drug is most often prescribed under.
    pub fn drug_bnf(&self, drug: DrugId) -> BnfId {
        self.drug_bnf[drug.index()]
    }

    pub fn bnf_code(&self, bnf: BnfId) -> &str {
        &self.bnf_codes[bnf.index()]
    }

    /// Indices into [`Database::prescriptions`] of every prescription of
    /// `drug`, ordered by patient then date.
    pub fn drug_prescription_indices(&self, drug: DrugId) -> &[usize] {
        &self.drug_rx[drug.index()]
    }

    pub fn occurrences(&self, code: &ReadCode) -> Option<&CodeOccurrences> {
        self.code_index.get(code)
    }

    /// Sorted dates at which `patient` has exactly `code` recorded.
    pub fn event_dates(&self, code: &ReadCode, patient: usize) -> &[Day] {
        self.code_index.get(code).map_or(&[], |o| o.dates_for(patient))
    }

    /// An event code is known when it is recorded or labelled.
    pub fn check_event(&self, code: &ReadCode) -> Result<()> {
        if self.code_index.contains_key(code) || self.label_codes.contains(code) {
            Ok(())
        } else {
            Err(Error::UnknownEvent(code.to_string()))
        }
    }

    /// Per-prescription flags for a criterion; index-aligned with
    /// [`Database::prescriptions`].
    pub fn qualifying_flags(&self, criterion: Criterion, lookback_days: Day) -> Vec<bool> {
        let mut flags = vec![true; self.prescriptions.len()];
        if criterion == Criterion::All {
            return flags;
        }
        let mut last_seen: HashMap<u32, Day> = HashMap::new();
        for range in &self.rx_by_patient {
            last_seen.clear();
            for i in range.clone() {
                let p = &self.prescriptions[i];
                let key = match criterion {
                    Criterion::FirstInLookbackDrug => p.drug.0,
                    _ => p.bnf.0,
                };
                if let Some(prev) = last_seen.insert(key, p.date) {
                    if p.date - prev < lookback_days {
                        flags[i] = false;
                    }
                }
            }
        }
        flags
    }

    pub fn qualifying_prescriptions(
        &self,
        drug_code: &str,
        criterion: Criterion,
        lookback_days: Day,
    ) -> Result<Vec<&Prescription>> {
        let drug = self.drug_id(drug_code)?;
        let flags = self.qualifying_flags(criterion, lookback_days);
        Ok(self.drug_rx[drug.index()]
            .iter()
            .filter(|&&i| flags[i])
            .map(|&i| &self.prescriptions[i])
            .collect())
    }
}

fn ranges_by_patient(owners: impl Iterator<Item = usize>, n_patients: usize) -> Vec<Range<usize>> {
    let mut ranges = vec![0..0; n_patients];
    let mut start = 0;
    let mut current: Option<usize> = None;
    let mut i = 0;
    for owner in owners {
        if current != Some(owner) {
            if let Some(c) = current {
                ranges[c] = start..i;
            }
            current = Some(owner);
            start = i;
        }
        i += 1;
    }
    if let Some(c) = current {
        ranges[c] = start..i;
    }
    ranges
}

// CSV parsing.

fn records<R: Read>(
    input: R,
    file: &str,
    header: &str,
) -> Result<impl Iterator<Item = Result<(u64, csv::StringRecord)>>> {
    let reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut iter = reader.into_records();
    let first = match iter.next() {
        Some(r) => r.map_err(|e| csv_error(file, e))?,
        None => csv::StringRecord::new(),
    };
    let found = first.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(Error::Header {
            file: file.to_string(),
            expected: header.to_string(),
            found,
        });
    }
    let width = header.split(',').count();
    let file = file.to_string();
    Ok(iter.map(move |r| {
        let rec = r.map_err(|e| csv_error(&file, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(Error::row(
                &file,
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        Ok((line, rec))
    }))
}

fn csv_error(file: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::row(file, line, e.to_string())
}

fn non_empty<'a>(file: &str, line: u64, field: &str, value: &'a str) -> Result<&'a str> {
    if value.is_empty() {
        Err(Error::row(file, line, format!("empty {field}")))
    } else {
        Ok(value)
    }
}

fn parse_day(file: &str, line: u64, value: &str) -> Result<Day> {
    value
        .parse::<Day>()
        .map_err(|_| Error::row(file, line, format!("unparseable date `{value}`")))
}

fn parse_patients<R: Read>(input: R, file: &str) -> Result<Vec<(u64, PatientRecord)>> {
    records(input, file, PATIENTS_HEADER)?
        .map(|r| {
            let (line, rec) = r?;
            let id = non_empty(file, line, "patient_id", &rec[0])?;
            let gender = match &rec[1] {
                "M" => Gender::Male,
                "F" => Gender::Female,
                other => return Err(Error::row(file, line, format!("gender `{other}` not M or F"))),
            };
            let birth_year = rec[2]
                .parse()
                .map_err(|_| Error::row(file, line, format!("unparseable birth_year `{}`", &rec[2])))?;
            Ok((
                line,
                PatientRecord {
                    patient_id: id.to_string(),
                    gender,
                    birth_year,
                },
            ))
        })
        .collect()
}

fn parse_prescriptions<R: Read>(input: R, file: &str) -> Result<Vec<(u64, PrescriptionRow)>> {
    records(input, file, PRESCRIPTIONS_HEADER)?
        .map(|r| {
            let (line, rec) = r?;
            let dosage_value = match &rec[4] {
                "" => None,
                v => Some(
                    v.parse::<f64>()
                        .map_err(|_| Error::row(file, line, format!("unparseable dosage_value `{v}`")))?,
                ),
            };
            let dosage_unit = (!rec[5].is_empty()).then(|| rec[5].to_string());
            Ok((
                line,
                PrescriptionRow {
                    patient_id: non_empty(file, line, "patient_id", &rec[0])?.to_string(),
                    date: parse_day(file, line, &rec[1])?,
                    drug_code: non_empty(file, line, "drug_code", &rec[2])?.to_string(),
                    bnf_code: non_empty(file, line, "bnf_code", &rec[3])?.to_string(),
                    dosage_value,
                    dosage_unit,
                },
            ))
        })
        .collect()
}

fn parse_code(file: &str, line: u64, value: &str) -> Result<ReadCode> {
    ReadCode::parse(value).map_err(|_| Error::row(file, line, format!("malformed read_code `{value}`")))
}

fn parse_events<R: Read>(input: R, file: &str) -> Result<Vec<(u64, EventRow)>> {
    records(input, file, EVENTS_HEADER)?
        .map(|r| {
            let (line, rec) = r?;
            Ok((
                line,
                EventRow {
                    patient_id: non_empty(file, line, "patient_id", &rec[0])?.to_string(),
                    date: parse_day(file, line, &rec[1])?,
                    read_code: parse_code(file, line, &rec[2])?,
                },
            ))
        })
        .collect()
}

fn parse_labels<R: Read>(input: R, file: &str) -> Result<Vec<(u64, LabelledPair)>> {
    records(input, file, LABELS_HEADER)?
        .map(|r| {
            let (line, rec) = r?;
            Ok((
                line,
                LabelledPair {
                    drug_code: non_empty(file, line, "drug_code", &rec[0])?.to_string(),
                    read_code: parse_code(file, line, &rec[1])?,
                    label: rec[2].parse().map_err(|m: String| Error::row(file, line, m))?,
                },
            ))
        })
        .collect()
}
