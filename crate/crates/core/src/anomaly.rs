//! Scoring a snapshot stream against its own trailing history and flagging
//! collapses in the similarity score.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::graph::TemporalGraphSignal;
use crate::model::Predictor;
use crate::noise::Bucket;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum AlarmPolicy {
    /// Fire when the score drops below `threshold`.
    FixedThreshold { threshold: f64 },
    /// Fire when the score drops below `mean - multiplier * std` of the last
    /// `window` unflagged scores.
    ZScore { window: usize, multiplier: f64 },
}

impl Default for AlarmPolicy {
    fn default() -> Self {
        AlarmPolicy::ZScore { window: 20, multiplier: 3.0 }
    }
}

impl AlarmPolicy {
    pub const DEFAULT_THRESHOLD: f64 = 0.7;

    pub fn validate(&self) -> Result<()> {
        match *self {
            AlarmPolicy::FixedThreshold { threshold } if !(threshold > 0.0 && threshold < 1.0) => {
                Err(Error::config(alloc::format!("threshold must lie in (0, 1), got {threshold}")))
            }
            AlarmPolicy::ZScore { window, .. } if window < 3 => {
                Err(Error::config(alloc::format!("z-score window must be at least 3, got {window}")))
            }
            AlarmPolicy::ZScore { multiplier, .. } if !(multiplier > 0.0) => {
                Err(Error::config(alloc::format!("z-score multiplier must be positive, got {multiplier}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlarmRule {
    BelowThreshold,
    ZScore,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnomalyEvent {
    /// Position in the score series passed to [`detect`]; snapshot index
    /// when produced by [`ScoreStream::detect`].
    pub index: usize,
    pub score: f64,
    pub rule: AlarmRule,
    /// Threshold the score was compared with.
    pub threshold: f64,
    /// Trailing mean and standard deviation (z-score mode only).
    pub trailing_mean: Option<f64>,
    pub trailing_std: Option<f64>,
}

/// Events plus the threshold in force at every position (`None` while the
/// z-score window is still filling).
#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub events: Vec<AnomalyEvent>,
    pub thresholds: Vec<Option<f64>>,
}

pub fn detect(scores: &[f64], policy: &AlarmPolicy) -> Result<Vec<AnomalyEvent>> {
    Ok(detect_with_thresholds(scores, policy)?.events)
}

pub fn detect_with_thresholds(scores: &[f64], policy: &AlarmPolicy) -> Result<Detection> {
    policy.validate()?;
    let mut events = Vec::new();
    let mut thresholds = Vec::with_capacity(scores.len());
    match *policy {
        AlarmPolicy::FixedThreshold { threshold } => {
            for (i, &s) in scores.iter().enumerate() {
                thresholds.push(Some(threshold));
                if s < threshold {
                    events.push(AnomalyEvent {
                        index: i,
                        score: s,
                        rule: AlarmRule::BelowThreshold,
                        threshold,
                        trailing_mean: None,
                        trailing_std: None,
                    });
                }
            }
        }
        AlarmPolicy::ZScore { window, multiplier } => {
            if scores.len() < window {
                return Err(Error::contract(alloc::format!(
                    "z-score window {window} is longer than the {} scores",
                    scores.len()
                )));
            }
            let mut accepted: Vec<f64> = Vec::with_capacity(scores.len());
            for (i, &s) in scores.iter().enumerate() {
                if accepted.len() < window {
                    thresholds.push(None);
                    accepted.push(s);
                    continue;
                }
                let trail = &accepted[accepted.len() - window..];
                let mean = trail.iter().sum::<f64>() / window as f64;
                let var = trail.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / window as f64;
                let std = libm::sqrt(var);
                let threshold = mean - multiplier * std;
                thresholds.push(Some(threshold));
                if s < threshold {
                    events.push(AnomalyEvent {
                        index: i,
                        score: s,
                        rule: AlarmRule::ZScore,
                        threshold,
                        trailing_mean: Some(mean),
                        trailing_std: Some(std),
                    });
                } else {
                    accepted.push(s);
                }
            }
        }
    }
    Ok(Detection { events, thresholds })
}

/// Scores of consecutive windows; `scores[i]` belongs to the window whose
/// candidate is snapshot `first_index + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreStream {
    pub first_index: usize,
    pub scores: Vec<f64>,
}

impl ScoreStream {
    /// Like [`detect_with_thresholds`], with event indices translated to
    /// snapshot indices.
    pub fn detect(&self, policy: &AlarmPolicy) -> Result<Detection> {
        let mut d = detect_with_thresholds(&self.scores, policy)?;
        for e in &mut d.events {
            e.index += self.first_index;
        }
        Ok(d)
    }
}

/// Scores every window of `len` snapshots ending at `len - 1 ..= S - 1`.
pub fn score_stream(predictor: &Predictor, signal: &TemporalGraphSignal, len: usize) -> Result<ScoreStream> {
    let s = signal.num_snapshots();
    if len == 0 || len > s {
        return Err(Error::contract(alloc::format!("window length {len} does not fit {s} snapshots")));
    }
    let scores = (len - 1..s)
        .map(|t| predictor.predict(signal, &Bucket { start: t + 1 - len, len }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreStream { first_index: len - 1, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fixed_threshold_quiet_on_high_scores() {
        let p = AlarmPolicy::FixedThreshold { threshold: 0.7 };
        assert!(detect(&[0.95; 30], &p).unwrap().is_empty());
        let ev = detect(&[0.9, 0.6, 0.8], &p).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].index, 1);
    }

    #[test]
    fn single_dip_after_flat_trail() {
        let mut scores = vec![0.9; 19];
        scores.push(0.1);
        let ev = detect(&scores, &AlarmPolicy::ZScore { window: 10, multiplier: 3.0 }).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].index, 19);
        assert!((ev[0].trailing_mean.unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn adjacent_dips_both_fire() {
        let mut scores: Vec<f64> = (0..30).map(|i| 0.9 + 0.01 * ((i % 3) as f64 - 1.0)).collect();
        scores[20] = 0.2;
        scores[21] = 0.5;
        let ev = detect(&scores, &AlarmPolicy::default()).unwrap();
        let idx: Vec<usize> = ev.iter().map(|e| e.index).collect();
        assert_eq!(idx, vec![20, 21]);
    }

    #[test]
    fn window_longer_than_series() {
        let err = detect(&[0.5; 5], &AlarmPolicy::ZScore { window: 10, multiplier: 3.0 });
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn policy_validation() {
        assert!(AlarmPolicy::FixedThreshold { threshold: 1.0 }.validate().is_err());
        assert!(AlarmPolicy::ZScore { window: 2, multiplier: 3.0 }.validate().is_err());
        assert!(AlarmPolicy::ZScore { window: 5, multiplier: 0.0 }.validate().is_err());
        assert!(AlarmPolicy::default().validate().is_ok());
    }
}
