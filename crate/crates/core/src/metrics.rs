//! One-to-one spatiotemporal matching of detections against ground truth.
//!
//! A (ground truth, detection) pair is eligible when the Euclidean distance
//! is at most `spatial_tol` pixels and the frame gap at most `temporal_tol`
//! frames. Eligible pairs are accepted closest-first; every index is used
//! at most once.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::heatmap::Detection;
use crate::image::MitosisEvent;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct MatchConfig {
    pub spatial_tol: f64,
    pub temporal_tol: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            spatial_tol: 15.0,
            temporal_tol: 6,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.spatial_tol > 0.0 && self.spatial_tol.is_finite()) || self.temporal_tol == 0 {
            return Err(Error::InvalidConfig("matching tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Match {
    pub gt: usize,
    pub det: usize,
    pub spatial_dist: f64,
    pub temporal_dist: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchResult {
    pub matches: Vec<Match>,
    pub false_positives: Vec<usize>,
    pub false_negatives: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    #[cfg_attr(feature = "serde", serde(rename = "fn"))]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricsReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }
}

/// A point in space-time; both ground truth and detections reduce to this.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTime {
    pub t: usize,
    pub x: f64,
    pub y: f64,
}

impl From<&MitosisEvent> for SpaceTime {
    fn from(e: &MitosisEvent) -> Self {
        Self { t: e.t, x: e.x, y: e.y }
    }
}

impl From<&Detection> for SpaceTime {
    fn from(d: &Detection) -> Self {
        Self { t: d.t, x: d.x, y: d.y }
    }
}

/// Eligible `(gt, det)` pairs, sorted by spatial distance, then frame gap,
/// then indices.
pub fn eligible_pairs(gt: &[SpaceTime], det: &[SpaceTime], cfg: &MatchConfig) -> Vec<Match> {
    let mut pairs = Vec::new();
    for (gi, g) in gt.iter().enumerate() {
        for (di, d) in det.iter().enumerate() {
            let spatial_dist = libm::hypot(g.x - d.x, g.y - d.y);
            let temporal_dist = g.t.abs_diff(d.t);
            if spatial_dist <= cfg.spatial_tol && temporal_dist <= cfg.temporal_tol {
                pairs.push(Match {
                    gt: gi,
                    det: di,
                    spatial_dist,
                    temporal_dist,
                });
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.spatial_dist
            .total_cmp(&b.spatial_dist)
            .then(a.temporal_dist.cmp(&b.temporal_dist))
            .then(a.gt.cmp(&b.gt))
            .then(a.det.cmp(&b.det))
    });
    pairs
}

/// Greedy closest-first matching over generic space-time points.
pub fn match_points(gt: &[SpaceTime], det: &[SpaceTime], cfg: &MatchConfig) -> MatchResult {
    let mut gt_used = alloc::vec![false; gt.len()];
    let mut det_used = alloc::vec![false; det.len()];
    let mut matches = Vec::new();
    for m in eligible_pairs(gt, det, cfg) {
        if !gt_used[m.gt] && !det_used[m.det] {
            gt_used[m.gt] = true;
            det_used[m.det] = true;
            matches.push(m);
        }
    }
    let unused = |used: Vec<bool>| used.iter().enumerate().filter(|(_, u)| !**u).map(|(i, _)| i).collect();
    MatchResult {
        matches,
        false_positives: unused(det_used),
        false_negatives: unused(gt_used),
    }
}

pub fn match_detections(gt: &[MitosisEvent], det: &[Detection], cfg: &MatchConfig) -> MatchResult {
    let g: Vec<SpaceTime> = gt.iter().map(SpaceTime::from).collect();
    let d: Vec<SpaceTime> = det.iter().map(SpaceTime::from).collect();
    match_points(&g, &d, cfg)
}

pub fn score(m: &MatchResult) -> MetricsReport {
    MetricsReport::from_counts(m.matches.len(), m.false_positives.len(), m.false_negatives.len())
}

/// Score the detections kept at each score threshold.
pub fn sweep(
    gt: &[MitosisEvent],
    det: &[Detection],
    cfg: &MatchConfig,
    thresholds: &[f64],
) -> Vec<(f64, MetricsReport)> {
    thresholds
        .iter()
        .map(|&th| {
            let kept: Vec<Detection> = det.iter().copied().filter(|d| d.score >= th).collect();
            (th, score(&match_detections(gt, &kept, cfg)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ev(t: usize, x: f64, y: f64) -> MitosisEvent {
        MitosisEvent::new(t, x, y)
    }

    fn det(t: usize, x: f64, y: f64, score: f64) -> Detection {
        Detection { t, x, y, score }
    }

    #[test]
    fn identity_match() {
        let m = match_detections(
            &[ev(5, 10.0, 10.0)],
            &[det(5, 10.0, 10.0, 1.0)],
            &MatchConfig::default(),
        );
        assert_eq!(m.matches.len(), 1);
        assert_eq!(m.matches[0].spatial_dist, 0.0);
    }

    #[test]
    fn tolerances_are_inclusive() {
        let cfg = MatchConfig::default();
        let one = |g: MitosisEvent, d: Detection| match_detections(&[g], &[d], &cfg).matches.len();
        assert_eq!(one(ev(5, 0.0, 0.0), det(5, 15.0, 0.0, 1.0)), 1);
        assert_eq!(one(ev(5, 0.0, 0.0), det(5, 15.1, 0.0, 1.0)), 0);
        assert_eq!(one(ev(0, 0.0, 0.0), det(6, 0.0, 0.0, 1.0)), 1);
        assert_eq!(one(ev(0, 0.0, 0.0), det(7, 0.0, 0.0, 1.0)), 0);
        assert_eq!(one(ev(7, 0.0, 0.0), det(0, 0.0, 0.0, 1.0)), 0);
    }

    #[test]
    fn closest_pair_wins() {
        let gt = [ev(1, 0.0, 0.0)];
        let dets = [det(1, 5.0, 0.0, 0.9), det(1, 2.0, 0.0, 0.1)];
        let m = match_detections(&gt, &dets, &MatchConfig::default());
        assert_eq!(m.matches[0].det, 1);
        assert_eq!(m.false_positives, vec![0]);
    }

    #[test]
    fn frame_gap_breaks_spatial_ties() {
        let gt = [ev(4, 0.0, 0.0)];
        let dets = [det(1, 3.0, 0.0, 0.5), det(4, 0.0, 3.0, 0.5)];
        let m = match_detections(&gt, &dets, &MatchConfig::default());
        assert_eq!(m.matches[0].det, 1);
    }

    #[test]
    fn score_arithmetic() {
        let r = MetricsReport::from_counts(1, 1, 1);
        assert_eq!((r.precision, r.recall, r.f1), (0.5, 0.5, 0.5));
        let r = MetricsReport::from_counts(0, 0, 3);
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert_eq!(MetricsReport::from_counts(4, 0, 0).f1, 1.0);
        assert_eq!(MetricsReport::from_counts(0, 0, 0).f1, 0.0);
    }

    #[test]
    fn sweep_filters_by_score() {
        let gt = [ev(1, 0.0, 0.0), ev(2, 40.0, 40.0)];
        let dets = [det(1, 0.0, 0.0, 0.9), det(2, 40.0, 41.0, 0.4), det(3, 90.0, 90.0, 0.2)];
        let cfg = MatchConfig::default();
        let rows = sweep(&gt, &dets, &cfg, &[0.0, 0.3, 0.5, 0.95]);
        assert_eq!(rows[0].1, score(&match_detections(&gt, &dets, &cfg)));
        assert_eq!((rows[0].1.tp, rows[0].1.fp), (2, 1));
        assert_eq!((rows[1].1.tp, rows[1].1.fp), (2, 0));
        assert_eq!((rows[2].1.tp, rows[2].1.fn_), (1, 1));
        assert_eq!((rows[3].1.tp, rows[3].1.fp, rows[3].1.fn_), (0, 0, 2));
    }

    #[test]
    fn invalid_config() {
        assert!(MatchConfig {
            spatial_tol: 0.0,
            temporal_tol: 6
        }
        .validate()
        .is_err());
        assert!(MatchConfig {
            spatial_tol: 15.0,
            temporal_tol: 0
        }
        .validate()
        .is_err());
    }
}
