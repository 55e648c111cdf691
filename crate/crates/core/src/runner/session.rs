use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{predictive_padding, weighted_ari, LabelKind};
use crate::explore::{choose, score_candidates, ExplorationState, IgTable};
use crate::grid::travel_costs;
use crate::model::{Observation, Point};
use crate::rbpf::{ParticleSet, ParticleSetSnapshot};
use crate::rng::{substream, tag};
use crate::runner::config::{Config, VocabularyMode};
use crate::runner::env::Environment;
use crate::teacher::{answer_tokens, extend_vocabulary, Query, Vocabulary};

/// The question the robot is about to ask, and the table it chose it from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingQuery {
    /// Number of observations made before this query.
    pub step: usize,
    pub candidate: usize,
    pub position: [f64; 2],
    pub travel_cells: f64,
    pub table: IgTable,
}

/// Metrics after one observation. ARIs are NaN without ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based.
    pub step: usize,
    pub candidate: usize,
    pub position: [f64; 2],
    pub tokens: Vec<String>,
    pub travel_cells: f64,
    pub cum_travel: f64,
    /// Best score in the table the destination was chosen from; NaN for
    /// policies that do not score candidates.
    pub max_ig: f64,
    pub ari_c_step: f64,
    pub ari_i_step: f64,
    pub ari_c_pad: f64,
    pub ari_i_pad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    Exhausted,
    IgConverged,
}

/// One answered query as stored in the observation log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedAnswer {
    pub candidate: usize,
    pub tokens: Vec<String>,
}

/// Serializable session state (the environment is rebuilt from the config).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub config: Config,
    pub particles: ParticleSetSnapshot,
    pub exploration: ExplorationState,
    pub vocabulary: Vocabulary,
    pub records: Vec<StepRecord>,
    pub tables: Vec<IgTable>,
    pub low_ig_streak: usize,
    pub stopped: Option<StopReason>,
}

/// The exploration loop, split into its two halves so that an interactive
/// front end can wait for a human answer between them: `plan` scores the
/// candidates and picks the next query point, `answer` learns from the reply
/// and records metrics.
#[derive(Debug, Clone)]
pub struct ExplorationSession {
    config: Config,
    env: Arc<Environment>,
    set: ParticleSet,
    vocab: Vocabulary,
    exploration: ExplorationState,
    pending: Option<PendingQuery>,
    records: Vec<StepRecord>,
    tables: Vec<IgTable>,
    low_ig_streak: usize,
    stopped: Option<StopReason>,
}

impl ExplorationSession {
    pub fn new(config: Config, env: Arc<Environment>) -> Result<Self> {
        config.validate()?;
        let vocab = match config.run.vocabulary {
            VocabularyMode::Frozen => env
                .annotation
                .as_ref()
                .ok_or_else(|| Error::Config("a frozen vocabulary needs an annotation".into()))?
                .inventory(config.run.answers),
            VocabularyMode::Growing => Vocabulary::new(),
        };
        let set = ParticleSet::new(config.model.clone(), vocab.len(), config.run.seed)?;
        let exploration = ExplorationState::new(env.start(), config.run.revisit, 0);
        let mut session = Self {
            config,
            env,
            set,
            vocab,
            exploration,
            pending: None,
            records: Vec::new(),
            tables: Vec::new(),
            low_ig_streak: 0,
            stopped: None,
        };
        session.exploration.step_budget = session.budget();
        Ok(session)
    }

    pub fn from_snapshot(snap: SessionSnapshot, env: Arc<Environment>) -> Result<Self> {
        let set = ParticleSet::from_snapshot(&snap.particles)?;
        if snap.records.len() != set.step() || snap.tables.len() != snap.records.len() {
            return Err(Error::Snapshot(
                "records do not match the particle set".into(),
            ));
        }
        if set.vocab_size() != snap.vocabulary.len() {
            return Err(Error::Snapshot(
                "vocabulary size differs from the particle set".into(),
            ));
        }
        Ok(Self {
            config: snap.config,
            env,
            set,
            vocab: snap.vocabulary,
            exploration: snap.exploration,
            pending: None,
            records: snap.records,
            tables: snap.tables,
            low_ig_streak: snap.low_ig_streak,
            stopped: snap.stopped,
        })
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            config: self.config.clone(),
            particles: self.set.snapshot(),
            exploration: self.exploration.clone(),
            vocabulary: self.vocab.clone(),
            records: self.records.clone(),
            tables: self.tables.clone(),
            low_ig_streak: self.low_ig_streak,
            stopped: self.stopped,
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn environment(&self) -> &Arc<Environment> {
        &self.env
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.set
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn exploration(&self) -> &ExplorationState {
        &self.exploration
    }

    pub fn pending(&self) -> Option<&PendingQuery> {
        self.pending.as_ref()
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    /// Candidate tables in step order; `tables()[i]` chose `records()[i]`.
    pub fn tables(&self) -> &[IgTable] {
        &self.tables
    }

    pub fn stopped(&self) -> Option<StopReason> {
        self.stopped
    }

    pub fn is_complete(&self) -> bool {
        self.stopped.is_some()
    }

    pub fn observation_log(&self) -> Vec<LoggedAnswer> {
        self.records
            .iter()
            .map(|r| LoggedAnswer {
                candidate: r.candidate,
                tokens: r.tokens.clone(),
            })
            .collect()
    }

    pub fn budget(&self) -> usize {
        self.config.run.steps.unwrap_or(self.env.candidates.len())
    }

    /// Scores candidates from the current pose and fixes the next query
    /// point. Returns `None` once the session has stopped.
    pub fn plan(&mut self) -> Result<Option<&PendingQuery>> {
        if self.pending.is_some() {
            return Ok(self.pending.as_ref());
        }
        if self.stopped.is_some() {
            return Ok(None);
        }
        if self.records.len() >= self.budget() {
            self.stopped = Some(StopReason::Budget);
            return Ok(None);
        }
        let step = self.records.len();
        let points = self.env.candidates.points();
        let eligible = self.exploration.eligible(points.len());
        let travel = travel_costs(&self.env.grid, &self.exploration.pose(), &points)?;
        let policy = self.config.policy.name;
        let seed = self.config.run.seed;
        let table = score_candidates(
            &self.set,
            &points,
            &eligible,
            &travel,
            policy.scoring(),
            self.config.eta(),
            seed,
            step as u64,
        )?;
        let mut rng = substream(seed, tag::POLICY, step as u64, 0);
        let candidate = match choose(policy, &table, &mut rng) {
            Ok(c) => c,
            Err(Error::ExplorationComplete) => {
                self.stopped = Some(StopReason::Exhausted);
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        let p = points[candidate];
        self.pending = Some(PendingQuery {
            step,
            candidate,
            position: [p.x, p.y],
            travel_cells: travel[candidate],
            table,
        });
        Ok(self.pending.as_ref())
    }

    /// What the scripted teacher says at the pending query point.
    pub fn scripted_answer(&self) -> Result<Vec<String>> {
        let q = self.pending.as_ref().ok_or(Error::NoPendingQuery)?;
        let annotation = self
            .env
            .annotation
            .as_ref()
            .ok_or_else(|| Error::Config("scripted answers need an annotation".into()))?;
        let visit = self
            .exploration
            .visited
            .iter()
            .filter(|&&c| c == q.candidate)
            .count();
        answer_tokens(
            annotation,
            &Point::new(q.position[0], q.position[1]),
            self.config.run.answers,
            Query {
                seed: self.config.run.seed,
                candidate: q.candidate,
                visit,
            },
        )
    }

    /// Learns from the answer to the pending query.
    pub fn answer(&mut self, tokens: Vec<String>) -> Result<&StepRecord> {
        let q = self.pending.as_ref().ok_or(Error::NoPendingQuery)?;
        let bag = match self.config.run.vocabulary {
            VocabularyMode::Frozen => self.vocab.encode(&tokens)?,
            VocabularyMode::Growing => {
                let mut vocab = self.vocab.clone();
                let bag = extend_vocabulary(&mut vocab, &tokens);
                self.set.grow_vocab(vocab.len())?;
                self.vocab = vocab;
                bag
            }
        };
        let position = Point::new(q.position[0], q.position[1]);
        self.set.online_update(&Observation::new(position, bag))?;
        let q = self.pending.take().expect("checked above");
        self.exploration.visit(q.candidate, position);

        let max_ig = q.table.max_ig().unwrap_or(f64::NAN);
        let cum_travel = self.records.last().map_or(0.0, |r| r.cum_travel) + q.travel_cells;
        let [ari_c_step, ari_i_step, ari_c_pad, ari_i_pad] = self.accuracy()?;
        if self.config.run.ig_stop {
            if max_ig < self.config.run.ig_stop_threshold {
                self.low_ig_streak += 1;
            } else {
                self.low_ig_streak = 0;
            }
        }
        self.records.push(StepRecord {
            step: q.step + 1,
            candidate: q.candidate,
            position: q.position,
            tokens,
            travel_cells: q.travel_cells,
            cum_travel,
            max_ig,
            ari_c_step,
            ari_i_step,
            ari_c_pad,
            ari_i_pad,
        });
        self.tables.push(q.table);
        if self.config.run.ig_stop && self.low_ig_streak >= self.config.run.ig_stop_patience {
            self.stopped = Some(StopReason::IgConverged);
        } else if self.records.len() >= self.budget() {
            self.stopped = Some(StopReason::Budget);
        }
        Ok(self.records.last().expect("just pushed"))
    }

    fn accuracy(&self) -> Result<[f64; 4]> {
        let Some(truth) = &self.env.truth else {
            return Ok([f64::NAN; 4]);
        };
        let visits = &self.exploration.visited;
        let observed: Vec<usize> = visits.iter().map(|&c| truth[c]).collect();
        let points = self.env.candidates.points();
        Ok([
            weighted_ari(&self.set, &observed, LabelKind::Concept)?,
            weighted_ari(&self.set, &observed, LabelKind::Posdist)?,
            predictive_padding(&self.set, &points, visits, truth, LabelKind::Concept)?,
            predictive_padding(&self.set, &points, visits, truth, LabelKind::Posdist)?,
        ])
    }

    /// One full step with the scripted teacher; `None` once stopped.
    pub fn step_auto(&mut self) -> Result<Option<&StepRecord>> {
        if self.plan()?.is_none() {
            return Ok(None);
        }
        let tokens = self.scripted_answer()?;
        self.answer(tokens).map(Some)
    }

    /// Runs the scripted loop until the session stops.
    pub fn run_to_end(&mut self) -> Result<()> {
        while self.step_auto()?.is_some() {}
        Ok(())
    }

    /// Re-runs the loop feeding logged answers instead of the teacher. Fails
    /// if a logged candidate differs from the one the policy picks.
    pub fn replay(&mut self, log: &[LoggedAnswer]) -> Result<()> {
        for entry in log {
            let chosen = self
                .plan()?
                .map(|q| q.candidate)
                .ok_or_else(|| Error::Snapshot("log is longer than the session".into()))?;
            if chosen != entry.candidate {
                return Err(Error::Snapshot(format!(
                    "replay diverged at step {}: chose {chosen}, log has {}",
                    self.records.len() + 1,
                    entry.candidate
                )));
            }
            self.answer(entry.tokens.clone())?;
        }
        Ok(())
    }
}
