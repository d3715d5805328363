use serde::{Deserialize, Serialize};

use crate::games::{Scene, TimedAction, TimedActionSequence, MAX_ACTIONS};

use super::HarnessError;

/// Value meaning "never eliminate this slot".
pub const SENTINEL: f64 = 1.0;

/// Normalized elimination times, one per action slot.
///
/// Slot `i` fires at control step `floor(u_i · max_steps)`; exactly `1.0`
/// means never.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimingVector([f64; MAX_ACTIONS]);

impl TimingVector {
    pub const NEVER: TimingVector = TimingVector([SENTINEL; MAX_ACTIONS]);

    /// Validates an agent response: exactly six finite values, clamped to `[0, 1]`.
    pub fn new(values: &[f64]) -> Result<TimingVector, HarnessError> {
        if values.len() != MAX_ACTIONS {
            return Err(HarnessError::MalformedTiming(format!(
                "expected {MAX_ACTIONS} values, got {}",
                values.len()
            )));
        }
        let mut out = [SENTINEL; MAX_ACTIONS];
        for (o, &v) in out.iter_mut().zip(values) {
            if !v.is_finite() {
                return Err(HarnessError::MalformedTiming(format!("non-finite value {v}")));
            }
            *o = v.clamp(0.0, 1.0);
        }
        Ok(TimingVector(out))
    }

    /// Encodes grid steps at the centre of their bucket, so decoding is exact.
    pub fn from_steps(steps: [Option<u32>; MAX_ACTIONS], max_steps: u32) -> TimingVector {
        let mut out = [SENTINEL; MAX_ACTIONS];
        for (o, s) in out.iter_mut().zip(steps) {
            if let Some(s) = s.filter(|&s| s < max_steps) {
                *o = (f64::from(s) + 0.5) / f64::from(max_steps);
            }
        }
        TimingVector(out)
    }

    /// Encodes a timed sequence against a scene's action slots.
    pub fn from_sequence(scene: &Scene, seq: &TimedActionSequence) -> TimingVector {
        let mut steps = [None; MAX_ACTIONS];
        for a in &seq.entries {
            if let Some(slot) = scene.slot_of(a.body) {
                steps[slot] = Some(a.step);
            }
        }
        TimingVector::from_steps(steps, scene.params.max_steps())
    }

    pub fn values(&self) -> &[f64; MAX_ACTIONS] {
        &self.0
    }

    /// Control step at which `slot` fires, if ever.
    pub fn step(&self, slot: usize, max_steps: u32) -> Option<u32> {
        let u = self.0[slot];
        if u >= SENTINEL {
            return None;
        }
        Some(((u * f64::from(max_steps)).floor() as u32).min(max_steps.saturating_sub(1)))
    }

    pub fn steps(&self, max_steps: u32) -> [Option<u32>; MAX_ACTIONS] {
        std::array::from_fn(|i| self.step(i, max_steps))
    }

    /// Grid tuple over the first `occupied` slots; two vectors with equal keys
    /// produce the same episode.
    pub fn grid_key(&self, occupied: usize, max_steps: u32) -> Vec<Option<u32>> {
        (0..occupied).map(|i| self.step(i, max_steps)).collect()
    }

    /// Decodes into eliminations of the scene's gray blocks; padding slots drop out.
    pub fn to_sequence(&self, scene: &Scene) -> TimedActionSequence {
        let max_steps = scene.params.max_steps();
        let grays = scene.gray_ids();
        let mut entries: Vec<(u32, usize)> = (0..grays.len().min(MAX_ACTIONS))
            .filter_map(|slot| self.step(slot, max_steps).map(|s| (s, slot)))
            .collect();
        entries.sort_unstable();
        TimedActionSequence {
            entries: entries.into_iter().map(|(step, slot)| TimedAction { body: grays[slot], step }).collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for TimingVector {
    type Error = HarnessError;
    fn try_from(v: Vec<f64>) -> Result<Self, HarnessError> {
        TimingVector::new(&v)
    }
}

impl From<TimingVector> for Vec<f64> {
    fn from(v: TimingVector) -> Vec<f64> {
        v.0.to_vec()
    }
}
