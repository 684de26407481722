//! Correlation-based feature selection.
//!
//! Columns are discretised (equal-frequency bins for continuous values,
//! identity for categorical ones, a dedicated bin for missing cells) and
//! compared with symmetrical uncertainty. A best-first forward search
//! maximises the subset merit
//!
//! ```text
//! merit(S) = k * mean_cf / sqrt(k + k (k - 1) * mean_ff)
//! ```
//!
//! where `mean_cf` is the mean feature/class correlation and `mean_ff` the
//! mean pairwise correlation inside `S`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::attributes::{Attribute, ValueKind};
use crate::error::{Error, Result};
use crate::matrix::{format_value, FeatureMatrix};
use crate::store::Label;

pub const DEFAULT_MAX_BINS: usize = 10;
pub const DEFAULT_MAX_STALE: usize = 5;

/// Bin reserved for missing cells.
pub const MISSING_BIN: u32 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMatrix {
    pub columns: Vec<Attribute>,
    /// Column-major: `data[j][i]` is row `i` of column `j`.
    pub data: Vec<Vec<u32>>,
    pub class: Vec<u32>,
}

/// Equal-frequency bin codes for the non-missing values (`1..`), with
/// missing cells in [`MISSING_BIN`]. Cut points are order statistics, so
/// any strictly increasing transform of the values gives the same bins.
pub fn equal_frequency_bins(values: &[Option<f64>], max_bins: usize) -> Vec<u32> {
    let mut sorted: Vec<f64> = values.iter().flatten().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut cuts: Vec<f64> = (1..max_bins).map(|i| sorted[i * n / max_bins]).collect();
    if n == 0 {
        cuts.clear();
    }
    cuts.dedup();
    values
        .iter()
        .map(|v| match v {
            None => MISSING_BIN,
            Some(x) => 1 + cuts.partition_point(|c| c <= x) as u32,
        })
        .collect()
}

/// Distinct values coded `1..` in ascending order, missing in [`MISSING_BIN`].
pub fn categorical_codes(values: &[Option<f64>]) -> Vec<u32> {
    let mut distinct: Vec<f64> = values.iter().flatten().copied().collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    values
        .iter()
        .map(|v| match v {
            None => MISSING_BIN,
            Some(x) => 1 + distinct.partition_point(|d| d < x) as u32,
        })
        .collect()
}

fn class_code(label: Label) -> u32 {
    match label {
        Label::Adr => 0,
        Label::Indicator => 1,
        Label::Noise => 2,
    }
}

pub fn discretize(matrix: &FeatureMatrix, max_bins: usize) -> DiscreteMatrix {
    let data = matrix
        .columns
        .iter()
        .enumerate()
        .map(|(j, attr)| {
            let values: Vec<Option<f64>> = matrix
                .rows
                .iter()
                .map(|r| (!r.values[j].missing).then_some(r.values[j].value))
                .collect();
            match attr.kind() {
                ValueKind::Categorical => categorical_codes(&values),
                ValueKind::Continuous => equal_frequency_bins(&values, max_bins),
            }
        })
        .collect();
    DiscreteMatrix {
        columns: matrix.columns.clone(),
        data,
        class: matrix.rows.iter().map(|r| class_code(r.label)).collect(),
    }
}

/// Summed over sorted counts so the result depends only on the multiset.
fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a usize>, n: f64) -> f64 {
    let mut counts: Vec<usize> = counts.copied().filter(|&c| c > 0).collect();
    counts.sort_unstable();
    counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `2 [H(x) + H(y) - H(x, y)] / [H(x) + H(y)]`, zero when either variable
/// is constant.
pub fn symmetrical_uncertainty(x: &[u32], y: &[u32]) -> f64 {
    assert_eq!(x.len(), y.len(), "columns must have equal length");
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mut hx: BTreeMap<u32, usize> = BTreeMap::new();
    let mut hy: BTreeMap<u32, usize> = BTreeMap::new();
    let mut hxy: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *hx.entry(a).or_default() += 1;
        *hy.entry(b).or_default() += 1;
        *hxy.entry((a, b)).or_default() += 1;
    }
    let ex = entropy_of_counts(hx.values(), n);
    let ey = entropy_of_counts(hy.values(), n);
    if ex <= 0.0 || ey <= 0.0 {
        return 0.0;
    }
    let exy = entropy_of_counts(hxy.values(), n);
    (2.0 * (ex + ey - exy) / (ex + ey)).clamp(0.0, 1.0)
}

/// Feature/class and feature/feature correlations for one discrete matrix.
#[derive(Debug, Clone)]
pub struct Correlations {
    pub class: Vec<f64>,
    pub pairwise: Vec<Vec<f64>>,
}

impl Correlations {
    pub fn compute(m: &DiscreteMatrix) -> Self {
        let k = m.columns.len();
        let class = m
            .data
            .iter()
            .map(|col| symmetrical_uncertainty(col, &m.class))
            .collect();
        let mut pairwise = vec![vec![1.0; k]; k];
        for (i, a) in m.data.iter().enumerate() {
            for (j, b) in m.data.iter().enumerate().skip(i + 1) {
                let su = symmetrical_uncertainty(a, b);
                pairwise[i][j] = su;
                pairwise[j][i] = su;
            }
        }
        Correlations { class, pairwise }
    }

    /// Merit of the subset given as column indices; 0 for the empty set.
    pub fn merit(&self, subset: &[usize]) -> f64 {
        let k = subset.len();
        if k == 0 {
            return 0.0;
        }
        let cf: f64 = subset.iter().map(|&i| self.class[i]).sum::<f64>() / k as f64;
        let ff = if k > 1 {
            let mut sum = 0.0;
            for (a, &i) in subset.iter().enumerate() {
                for &j in &subset[a + 1..] {
                    sum += self.pairwise[i][j];
                }
            }
            sum / (k * (k - 1) / 2) as f64
        } else {
            0.0
        };
        let kf = k as f64;
        kf * cf / (kf + kf * (kf - 1.0) * ff).sqrt()
    }
}

pub fn merit(subset: &[usize], matrix: &DiscreteMatrix) -> f64 {
    Correlations::compute(matrix).merit(subset)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Consecutive non-improving expansions before stopping; `None` runs
    /// the search until the open list is exhausted.
    pub max_stale: Option<usize>,
    pub max_bins: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_stale: Some(DEFAULT_MAX_STALE),
            max_bins: DEFAULT_MAX_BINS,
        }
    }
}

fn members(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Lexicographic order on the sorted member lists of two subsets.
fn canonical_cmp(mut a: u64, mut b: u64) -> Ordering {
    while a != 0 && b != 0 {
        let (la, lb) = (a.trailing_zeros(), b.trailing_zeros());
        if la != lb {
            return la.cmp(&lb);
        }
        a &= a - 1;
        b &= b - 1;
    }
    (a != 0).cmp(&(b != 0))
}

/// Best-first forward search. Returns the best subset (column indices,
/// ascending) and its merit.
pub fn best_first(corr: &Correlations, config: &SearchConfig) -> (Vec<usize>, f64) {
    let k = corr.class.len();
    assert!(k <= 64, "at most 64 features supported");
    let mut open: Vec<(f64, u64)> = vec![(0.0, 0)];
    let mut visited: HashSet<u64> = HashSet::from([0]);
    let (mut best_merit, mut best_mask) = (0.0f64, 0u64);
    let mut stale = 0usize;
    while !open.is_empty() {
        let pick = (0..open.len())
            .max_by(|&i, &j| {
                open[i]
                    .0
                    .total_cmp(&open[j].0)
                    .then_with(|| canonical_cmp(open[j].1, open[i].1))
            })
            .unwrap();
        let (_, mask) = open.swap_remove(pick);
        let mut improved = false;
        for f in 0..k {
            let child = mask | 1 << f;
            if child == mask || !visited.insert(child) {
                continue;
            }
            let m = corr.merit(&members(child));
            open.push((m, child));
            if m > best_merit {
                best_merit = m;
                best_mask = child;
                improved = true;
            }
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if config.max_stale.is_some_and(|limit| stale >= limit) {
                break;
            }
        }
    }
    (members(best_mask), best_merit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfsResult {
    pub columns: Vec<Attribute>,
    /// Selected columns, in report order (rank 1 first).
    pub selected: Vec<Attribute>,
    pub merit: f64,
    /// Aligned with `columns`.
    pub class_correlation: Vec<f64>,
    /// Most-correlated selected attribute for each unselected column with
    /// nonzero class correlation. Aligned with `columns`.
    pub proxy: Vec<Option<Attribute>>,
}

pub fn select(matrix: &FeatureMatrix, config: &SearchConfig) -> Result<CfsResult> {
    if matrix.rows.len() < 2 {
        return Err(Error::DegenerateMatrix("need at least two rows".into()));
    }
    let classes: HashSet<Label> = matrix.labels().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::DegenerateMatrix("need at least two classes".into()));
    }
    if matrix.columns.is_empty() {
        return Err(Error::DegenerateMatrix("no attribute columns".into()));
    }
    let discrete = discretize(matrix, config.max_bins);
    let corr = Correlations::compute(&discrete);
    let (subset, merit) = best_first(&corr, config);

    let order = report_order(&matrix.columns, &corr.class);
    let selected: Vec<Attribute> = order
        .iter()
        .filter(|j| subset.contains(j))
        .map(|&j| matrix.columns[j])
        .collect();
    let proxy = (0..matrix.columns.len())
        .map(|j| {
            if subset.contains(&j) || corr.class[j] == 0.0 {
                return None;
            }
            subset
                .iter()
                .copied()
                .max_by(|&a, &b| corr.pairwise[j][a].total_cmp(&corr.pairwise[j][b]).then(b.cmp(&a)))
                .map(|s| matrix.columns[s])
        })
        .collect();
    Ok(CfsResult {
        columns: matrix.columns.clone(),
        selected,
        merit,
        class_correlation: corr.class,
        proxy,
    })
}

/// Column indices by descending printed class correlation, then catalogue
/// order.
fn report_order(columns: &[Attribute], class: &[f64]) -> Vec<usize> {
    let printed: Vec<f64> = class
        .iter()
        .map(|v| format_value(*v).parse().expect("formatted float"))
        .collect();
    let mut order: Vec<usize> = (0..columns.len()).collect();
    order.sort_by(|&a, &b| printed[b].total_cmp(&printed[a]).then(columns[a].cmp(&columns[b])));
    order
}

#[derive(Debug, Clone, PartialEq)]
pub enum RankOrProxy {
    Rank(usize),
    Proxy(Attribute),
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub attribute: Attribute,
    pub class_correlation: f64,
    pub rank_or_proxy: RankOrProxy,
}

impl CfsResult {
    pub fn report(&self) -> Vec<ReportRow> {
        report_order(&self.columns, &self.class_correlation)
            .into_iter()
            .map(|j| {
                let attribute = self.columns[j];
                let rank_or_proxy = match self.selected.iter().position(|&s| s == attribute) {
                    Some(r) => RankOrProxy::Rank(r + 1),
                    None => self.proxy[j].map_or(RankOrProxy::None, RankOrProxy::Proxy),
                };
                ReportRow {
                    attribute,
                    class_correlation: self.class_correlation[j],
                    rank_or_proxy,
                }
            })
            .collect()
    }

    pub fn report_tsv(&self) -> String {
        let mut out = String::from("attribute\tclass_correlation\tcfs_rank_or_proxy\n");
        for row in self.report() {
            let tag = match row.rank_or_proxy {
                RankOrProxy::Rank(r) => r.to_string(),
                RankOrProxy::Proxy(a) => a.name().to_string(),
                RankOrProxy::None => "-".to_string(),
            };
            writeln!(
                out,
                "{}\t{}\t{}",
                row.attribute,
                format_value(row.class_correlation),
                tag
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binary_and_constant_columns() {
        let binary = [Some(0.0), Some(1.0), Some(1.0), Some(0.0)];
        assert_eq!(categorical_codes(&binary), [1, 2, 2, 1]);
        let constant = [Some(3.5); 6];
        let bins = equal_frequency_bins(&constant, 10);
        assert!(bins.iter().all(|&b| b == bins[0] && b != MISSING_BIN));
        let with_missing = [Some(1.0), None, Some(2.0)];
        assert_eq!(categorical_codes(&with_missing), [1, MISSING_BIN, 2]);
    }

    #[test]
    fn hundred_values_make_ten_bins_of_ten() {
        // shuffled 0..100
        let values: Vec<Option<f64>> = (0..100).map(|i| Some(((i * 37) % 100) as f64)).collect();
        let bins = equal_frequency_bins(&values, 10);
        for (v, b) in values.iter().zip(&bins) {
            let expected = 1 + (v.unwrap() as u32) / 10;
            assert_eq!(*b, expected);
        }
        let mut counts = BTreeMap::new();
        for b in bins {
            *counts.entry(b).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 10);
        assert!(counts.values().all(|&c| c == 10));
    }

    #[test]
    fn su_examples() {
        let x = [0, 1, 2, 0, 1, 2];
        assert!((symmetrical_uncertainty(&x, &x) - 1.0).abs() < 1e-12);
        assert_eq!(symmetrical_uncertainty(&[4, 4, 4], &[0, 1, 2]), 0.0);
        // exact product distribution: every (x, y) combination equally often
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..4 {
            for j in 0..3 {
                for _ in 0..5 {
                    a.push(i);
                    b.push(j);
                }
            }
        }
        assert!(symmetrical_uncertainty(&a, &b).abs() < 1e-12);
    }

    fn corr_of(class: Vec<f64>, pairwise: Vec<Vec<f64>>) -> Correlations {
        Correlations { class, pairwise }
    }

    #[test]
    fn merit_examples() {
        let c = corr_of(vec![0.4, 0.4], vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!((c.merit(&[0]) - 0.4).abs() < 1e-15);
        // identical pair: 2 * SU / sqrt(2 + 2)
        assert!((c.merit(&[0, 1]) - 0.4).abs() < 1e-15);
        assert_eq!(c.merit(&[]), 0.0);
    }

    #[test]
    fn canonical_order() {
        assert_eq!(canonical_cmp(0b1, 0b10), Ordering::Less);
        assert_eq!(canonical_cmp(0b11, 0b101), Ordering::Less);
        assert_eq!(canonical_cmp(0b1, 0b11), Ordering::Less);
        assert_eq!(canonical_cmp(0b110, 0b110), Ordering::Equal);
    }

    fn random_columns(rows: usize, k: usize, seed: u64) -> DiscreteMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let class: Vec<u32> = (0..rows).map(|_| rng.gen_range(0..3)).collect();
        let data = (0..k)
            .map(|_| {
                let noise = rng.gen_range(0.0..1.0);
                class
                    .iter()
                    .map(|&c| if rng.gen_bool(noise) { rng.gen_range(0..4) } else { c })
                    .collect()
            })
            .collect();
        DiscreteMatrix {
            columns: Attribute::ALL[..k].to_vec(),
            data,
            class,
        }
    }

    proptest! {
        #[test]
        fn su_symmetric_and_bounded(x in prop::collection::vec(0u32..4, 1..60), seed in 0u64..1000) {
            let y: Vec<u32> = x.iter().enumerate().map(|(i, v)| (v + (i as u32 * seed as u32) % 3) % 5).collect();
            let a = symmetrical_uncertainty(&x, &y);
            let b = symmetrical_uncertainty(&y, &x);
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn best_first_beats_singletons(seed in 0u64..500, k in 2usize..8) {
            let m = random_columns(40, k, seed);
            let corr = Correlations::compute(&m);
            let (_, best) = best_first(&corr, &SearchConfig::default());
            for j in 0..k {
                prop_assert!(best + 1e-12 >= corr.merit(&[j]));
            }
        }
    }
}
