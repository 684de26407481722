//! End-to-end helpers shared by the command line and the tests.

use crate::attributes::ExtractorRegistry;
use crate::cfs::{self, SearchConfig};
use crate::context::Params;
use crate::error::Result;
use crate::matrix::{compute_features, FeatureMatrix};
use crate::store::Database;

/// Feature matrix as TSV text.
pub fn features_tsv(db: &Database, params: Params, registry: &ExtractorRegistry, workers: usize) -> Result<String> {
    Ok(compute_features(db, params, registry, workers)?.to_tsv())
}

/// Ranking report for a feature matrix in TSV form.
pub fn select_tsv(matrix_tsv: &str, search: &SearchConfig) -> Result<String> {
    let matrix = FeatureMatrix::from_tsv(matrix_tsv)?;
    Ok(cfs::select(&matrix, search)?.report_tsv())
}

/// Features then selection. The matrix goes through its text form so the
/// report matches running the two steps on files.
pub fn report_tsv(
    db: &Database,
    params: Params,
    registry: &ExtractorRegistry,
    workers: usize,
    search: &SearchConfig,
) -> Result<(String, String)> {
    let features = features_tsv(db, params, registry, workers)?;
    let report = select_tsv(&features, search)?;
    Ok((features, report))
}
