//! Scripted stand-in for a human operator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::signal::{SsvepGenParams, StimulusClass};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubjectBehavior {
    /// Always fixates the stimulus the plan calls for.
    Plan,
    /// Fixates one of the three stimuli uniformly at random.
    Random,
    /// Follows the plan, but with probability `lapse_rate` fixates one of the
    /// two wrong stimuli instead.
    Lapsing { lapse_rate: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualSubject {
    pub behavior: SubjectBehavior,
    /// Signal model of this subject; the seed identifies the subject.
    pub params: SsvepGenParams,
}

impl VirtualSubject {
    pub fn oracle(params: SsvepGenParams) -> Self {
        Self {
            behavior: SubjectBehavior::Plan,
            params,
        }
    }

    pub fn random(params: SsvepGenParams) -> Self {
        Self {
            behavior: SubjectBehavior::Random,
            params,
        }
    }

    pub fn lapsing(params: SsvepGenParams, lapse_rate: f64) -> Self {
        Self {
            behavior: SubjectBehavior::Lapsing { lapse_rate },
            params,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.params.validate()?;
        if let SubjectBehavior::Lapsing { lapse_rate } = self.behavior {
            if !(0.0..=1.0).contains(&lapse_rate) {
                return Err(Error::Argument(format!("lapse_rate must lie in [0, 1], got {lapse_rate}")));
            }
        }
        Ok(())
    }

    /// Stimulus fixated on a trial whose correct answer is `intended`.
    pub fn choose(&self, intended: StimulusClass, rng: &mut ChaCha8Rng) -> StimulusClass {
        match self.behavior {
            SubjectBehavior::Plan => intended,
            SubjectBehavior::Random => StimulusClass::ALL[rng.random_range(0..3)],
            SubjectBehavior::Lapsing { lapse_rate } => {
                if rng.random::<f64>() < lapse_rate {
                    let wrong: Vec<_> = StimulusClass::ALL.into_iter().filter(|c| *c != intended).collect();
                    wrong[rng.random_range(0..wrong.len())]
                } else {
                    intended
                }
            }
        }
    }

    pub fn choice_rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lapses_always_pick_a_wrong_stimulus() {
        let s = VirtualSubject::lapsing(SsvepGenParams::default(), 1.0);
        let mut rng = VirtualSubject::choice_rng(1);
        let picks: Vec<_> = (0..300).map(|_| s.choose(StimulusClass::F12, &mut rng)).collect();
        assert!(picks.iter().all(|c| *c != StimulusClass::F12));
        assert!(picks.contains(&StimulusClass::F10) && picks.contains(&StimulusClass::F15));
    }

    #[test]
    fn rate_bounds() {
        assert!(VirtualSubject::lapsing(SsvepGenParams::default(), 1.2).validate().is_err());
        assert!(VirtualSubject::lapsing(SsvepGenParams::default(), 0.0).validate().is_ok());
        let s = VirtualSubject::oracle(SsvepGenParams::default());
        let mut rng = VirtualSubject::choice_rng(0);
        assert_eq!(s.choose(StimulusClass::F15, &mut rng), StimulusClass::F15);
    }
}
