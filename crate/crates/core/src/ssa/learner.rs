use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::env::Environment;
use super::policy::{select_action, Policy, DEFAULT_EPSILON};
use super::stack::{apply_pla, ssc_evaluate, CheckpointStack};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Arm(usize),
    BeginPmp,
    EndPmp,
    Wait,
    /// Scales the probability of pulling `arm` in the current state up
    /// (`up`) or down.
    Adjust {
        up: bool,
        arm: usize,
    },
}

impl Action {
    pub const ALL: [Action; 9] = [
        Action::Arm(0),
        Action::Arm(1),
        Action::BeginPmp,
        Action::EndPmp,
        Action::Wait,
        Action::Adjust { up: true, arm: 0 },
        Action::Adjust { up: true, arm: 1 },
        Action::Adjust { up: false, arm: 0 },
        Action::Adjust { up: false, arm: 1 },
    ];

    pub fn count() -> usize {
        Self::ALL.len()
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&a| a == self).expect("action in table")
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> String {
        match self {
            Action::Arm(a) => format!("arm{a}"),
            Action::BeginPmp => "begin_pmp".into(),
            Action::EndPmp => "end_pmp".into(),
            Action::Wait => "wait".into(),
            Action::Adjust { up, arm } => format!("{}:arm{arm}", if up { "up" } else { "down" }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Factor applied by an upward adjustment; downward uses the inverse.
    pub gamma: f64,
    pub epsilon: f64,
    /// Keep one trace record per action. Events are always kept.
    pub record_steps: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig { gamma: 2.0, epsilon: DEFAULT_EPSILON, record_steps: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub state: String,
    pub action: String,
    pub reward: f64,
    #[serde(rename = "R")]
    pub cumulative: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Push,
    Pop,
    Eval,
    /// An adjustment chosen while no modification process was open.
    Noop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event: EventKind,
    pub t: u64,
    pub stack_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceRecord {
    Step(StepRecord),
    Event(EventRecord),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearnerTrace {
    pub records: Vec<TraceRecord>,
}

impl LearnerTrace {
    pub fn steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.records.iter().filter_map(|r| match r {
            TraceRecord::Step(s) => Some(s),
            TraceRecord::Event(_) => None,
        })
    }

    pub fn events(&self) -> impl Iterator<Item = &EventRecord> {
        self.records.iter().filter_map(|r| match r {
            TraceRecord::Event(e) => Some(e),
            TraceRecord::Step(_) => None,
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// A self-modifying learner living in one environment.
#[derive(Clone, Debug)]
pub struct Learner<E> {
    pub env: E,
    pub policy: Policy,
    pub stack: CheckpointStack,
    rng: ChaCha8Rng,
    t: u64,
    reward: f64,
    config: LearnerConfig,
}

impl<E: Environment> Learner<E> {
    pub fn new(env: E, seed: u64, config: LearnerConfig) -> Result<Self> {
        if !(1.0..=4.0).contains(&config.gamma) {
            return Err(Error::InvalidArgument("gamma must lie in [1, 4]".into()));
        }
        let policy = Policy::uniform_with_floor(env.num_states(), Action::count(), config.epsilon);
        Self::with_policy(env, policy, seed, config)
    }

    pub fn with_policy(env: E, policy: Policy, seed: u64, config: LearnerConfig) -> Result<Self> {
        if policy.states() != env.num_states() || policy.actions() != Action::count() {
            return Err(Error::InvalidArgument("policy shape does not match the environment".into()));
        }
        Ok(Learner {
            env,
            policy,
            stack: CheckpointStack::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            t: 0,
            reward: 0.0,
            config,
        })
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.reward
    }

    fn event(&self, trace: &mut LearnerTrace, event: EventKind) {
        trace.records.push(TraceRecord::Event(EventRecord { event, t: self.t, stack_depth: self.stack.len() }));
    }

    fn evaluate(&mut self, trace: &mut LearnerTrace) {
        self.event(trace, EventKind::Eval);
        for _ in ssc_evaluate(self.t, self.reward, &mut self.stack, &mut self.policy) {
            self.event(trace, EventKind::Pop);
        }
    }

    /// Executes one action.
    pub fn step(&mut self, trace: &mut LearnerTrace) {
        let state = self.env.observation();
        let index = select_action(&self.policy, state, &mut self.rng).expect("observation in policy table");
        let action = Action::from_index(index).expect("policy width matches action table");
        match action {
            Action::BeginPmp => {
                self.stack.close(self.t);
                self.evaluate(trace);
                self.stack.push(self.t, self.reward).expect("one action per time step");
                self.event(trace, EventKind::Push);
            }
            Action::EndPmp => {
                self.stack.close(self.t);
            }
            Action::Adjust { up, arm } => {
                let gamma = if up { self.config.gamma } else { 1.0 / self.config.gamma };
                let applied = apply_pla(&mut self.policy, state, Action::Arm(arm).index(), gamma, &mut self.stack)
                    .expect("valid state and factor");
                if !applied {
                    self.event(trace, EventKind::Noop);
                }
            }
            Action::Arm(_) | Action::Wait => {}
        }
        let r = self.env.step(action);
        self.reward += r;
        self.t += 1;
        if self.config.record_steps {
            trace.records.push(TraceRecord::Step(StepRecord {
                t: self.t,
                state: self.env.state_label(state),
                action: action.name(),
                reward: r,
                cumulative: self.reward,
            }));
        }
    }

    /// Runs until time `until`, then evaluates once more so the surviving
    /// checkpoints satisfy the criterion at the end of life.
    pub fn live(&mut self, until: u64, trace: &mut LearnerTrace) {
        while self.t < until {
            self.step(trace);
        }
        self.stack.close(self.t);
        self.evaluate(trace);
    }
}

#[derive(Clone, Debug)]
pub struct LearnerOutcome {
    pub trace: LearnerTrace,
    pub policy: Policy,
    pub stack: CheckpointStack,
    pub lifetime: u64,
    pub total_reward: f64,
}

impl LearnerOutcome {
    pub fn mean_reward(&self) -> f64 {
        self.total_reward / self.lifetime as f64
    }
}

pub fn run_learner<E: Environment>(env: E, lifetime: u64, seed: u64, config: LearnerConfig) -> Result<LearnerOutcome> {
    if lifetime == 0 {
        return Err(Error::InvalidArgument("lifetime must be at least 1".into()));
    }
    let mut learner = Learner::new(env, seed, config)?;
    let mut trace = LearnerTrace::default();
    learner.live(lifetime, &mut trace);
    Ok(LearnerOutcome { trace, policy: learner.policy, stack: learner.stack, lifetime, total_reward: learner.reward })
}

/// Total reward of a policy that never changes: modification actions only
/// cost time.
pub fn run_frozen<E: Environment>(mut env: E, policy: &Policy, lifetime: u64, seed: u64) -> Result<f64> {
    if policy.states() != env.num_states() || policy.actions() != Action::count() {
        return Err(Error::InvalidArgument("policy shape does not match the environment".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..lifetime {
        let a = select_action(policy, env.observation(), &mut rng)?;
        total += env.step(Action::from_index(a).expect("policy width matches action table"));
    }
    Ok(total)
}

/// Mean reward of the uniform policy over the learner's action set.
pub fn uniform_baseline<E: Environment>(env: E, lifetime: u64, seed: u64) -> Result<f64> {
    let policy = Policy::uniform(env.num_states(), Action::count());
    Ok(run_frozen(env, &policy, lifetime, seed)? / lifetime as f64)
}
