use super::learner::Action;

/// An environment with finitely many observations. Time advances by one per
/// action, whatever the action.
pub trait Environment: Clone {
    fn num_states(&self) -> usize;
    fn observation(&self) -> usize;
    fn state_label(&self, state: usize) -> String;
    /// Executes one action and returns its reward.
    fn step(&mut self, action: Action) -> f64;
    fn clock(&self) -> u64;
}

/// Two arms, one paying 1 and the other 0; they swap every `period` actions.
///
/// The observation is the last arm pulled and what it paid, or `start`
/// before the first pull.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchingBandit {
    period: u64,
    clock: u64,
    last: Option<(usize, bool)>,
}

impl SwitchingBandit {
    pub const STATES: usize = 5;

    pub fn new(period: u64) -> Self {
        assert!(period > 0, "period must be positive");
        SwitchingBandit { period, clock: 0, last: None }
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    /// The arm paying 1 at the current time.
    pub fn good_arm(&self) -> usize {
        ((self.clock / self.period) % 2) as usize
    }
}

impl Environment for SwitchingBandit {
    fn num_states(&self) -> usize {
        Self::STATES
    }

    fn observation(&self) -> usize {
        match self.last {
            None => 0,
            Some((arm, paid)) => 1 + 2 * arm + paid as usize,
        }
    }

    fn state_label(&self, state: usize) -> String {
        match state {
            0 => "start".into(),
            s => format!("arm{}:{}", (s - 1) / 2, (s - 1) % 2),
        }
    }

    fn step(&mut self, action: Action) -> f64 {
        let reward = match action {
            Action::Arm(arm) => {
                let paid = arm == self.good_arm();
                self.last = Some((arm, paid));
                if paid {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 0.0,
        };
        self.clock += 1;
        reward
    }

    fn clock(&self) -> u64 {
        self.clock
    }
}
