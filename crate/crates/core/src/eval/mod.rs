//! Object-level splits, ROC-AUC and report aggregation.

mod auc;
mod report;
mod split;

pub use auc::{roc_auc, roc_curve};
pub use report::{aggregate, AdjectiveAuc, AdjectiveRow, EvalReport, EvalRun, REPORT_VERSION};
pub use split::{make_split, SplitPlan, DEFAULT_TRAIN_RATIO};

use std::collections::BTreeSet;

use crate::adjectives::{AdjectiveLabelSet, ADJECTIVES};
use crate::error::{Error, Result};

/// Scores the test objects of `split` and computes their AUC.
///
/// `trained_on` lists every object the classifier saw during training;
/// any overlap with the test side is a hard failure.
pub fn evaluate<F>(
    split: &SplitPlan,
    trained_on: &BTreeSet<u32>,
    labels: &[AdjectiveLabelSet],
    mut score_object: F,
) -> Result<AdjectiveAuc>
where
    F: FnMut(u32) -> Result<f64>,
{
    split.check_disjoint()?;
    if let Some(id) = split.test.iter().find(|id| trained_on.contains(id)) {
        return Err(Error::Leakage(*id));
    }
    let adjective = split.adjective_index()?;
    let mut scores = Vec::with_capacity(split.test.len());
    let mut truth = Vec::with_capacity(split.test.len());
    for &id in &split.test {
        let label = labels
            .iter()
            .find(|l| l.object_id == id)
            .ok_or_else(|| Error::InvalidInput(format!("no labels for object {id}")))?;
        scores.push(score_object(id)?);
        truth.push(label.get(adjective));
    }
    Ok(AdjectiveAuc {
        adjective: ADJECTIVES[adjective].to_string(),
        auc: Some(roc_auc(&scores, &truth)?),
    })
}
