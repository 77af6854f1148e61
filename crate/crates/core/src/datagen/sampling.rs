//! Label subsampling for the N-shot and missing-annotation protocols.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::image::AnnotationSet;
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LabelSampling {
    /// Keep `n` events drawn uniformly without replacement.
    NShot(usize),
    /// Drop each event independently with this probability.
    MissingRate(f64),
}

/// Subsample `labels`; surviving events keep their original order.
pub fn sample_partial_labels(labels: &AnnotationSet, mode: LabelSampling, seed: u64) -> Result<AnnotationSet> {
    let mut rng = stream(seed);
    let events = labels.events();
    let kept: Vec<_> = match mode {
        LabelSampling::NShot(0) => return Err(Error::InvalidConfig("n-shot count must be at least 1")),
        LabelSampling::NShot(n) => {
            let mut idx = rand::seq::index::sample(&mut rng, events.len(), n.min(events.len())).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| events[i]).collect()
        }
        LabelSampling::MissingRate(r) if !(0.0..=1.0).contains(&r) => {
            return Err(Error::InvalidConfig("missing rate must lie in [0, 1]"))
        }
        LabelSampling::MissingRate(r) => events.iter().copied().filter(|_| !rng.random_bool(r)).collect(),
    };
    Ok(AnnotationSet::from_parts_unchecked(
        String::from(labels.sequence_name()),
        kept,
    ))
}
