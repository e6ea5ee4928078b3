use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mdp::{decode_state, RewardParams, RobotAction, NUM_ACTIONS, NUM_STATES};

use super::TrainingConfig;

pub const QTABLE_HEADER: [&str; 7] = ["state", "gaze", "smile", "answer", "q_a0", "q_a1", "q_a2"];

/// Provenance written as `# key=value` lines above the CSV header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QTableMeta {
    pub model_name: Option<String>,
    pub seed: Option<u64>,
    pub epochs_trained: u64,
    pub training: Option<TrainingConfig>,
    pub reward: Option<RewardParams>,
}

/// 30×3 action-value matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: [[f64; NUM_ACTIONS]; NUM_STATES],
    pub meta: QTableMeta,
}

impl Default for QTable {
    fn default() -> Self {
        Self::zeros()
    }
}

impl QTable {
    pub fn zeros() -> Self {
        Self {
            values: [[0.0; NUM_ACTIONS]; NUM_STATES],
            meta: QTableMeta::default(),
        }
    }

    pub fn from_values(values: [[f64; NUM_ACTIONS]; NUM_STATES]) -> Self {
        Self {
            values,
            meta: QTableMeta::default(),
        }
    }

    pub fn get(&self, state: usize, action: RobotAction) -> f64 {
        self.values[state][action.code()]
    }

    pub fn set(&mut self, state: usize, action: RobotAction, value: f64) {
        self.values[state][action.code()] = value;
    }

    pub fn row(&self, state: usize) -> &[f64; NUM_ACTIONS] {
        &self.values[state]
    }

    pub fn values(&self) -> &[[f64; NUM_ACTIONS]; NUM_STATES] {
        &self.values
    }

    /// Best action in `state`, ties going to the lowest action code.
    pub fn greedy_action(&self, state: usize) -> RobotAction {
        let row = &self.values[state];
        let mut best = 0;
        for a in 1..NUM_ACTIONS {
            if row[a] > row[best] {
                best = a;
            }
        }
        RobotAction::ALL[best]
    }

    pub fn max_value(&self, state: usize) -> f64 {
        self.values[state].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        let total: f64 = self.values.iter().flatten().sum();
        total / (NUM_STATES * NUM_ACTIONS) as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (key, value) in self.meta.to_pairs() {
            writeln!(out, "# {key}={value}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(QTABLE_HEADER).map_err(csv_io)?;
        for (state, row) in self.values.iter().enumerate() {
            let obs = decode_state(state)?;
            let mut record = vec![
                state.to_string(),
                obs.gaze.code().to_string(),
                obs.smile.code().to_string(),
                obs.answer.code().to_string(),
            ];
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Strict reader: 30 rows in state order, finite values, codes that
    /// agree with the state index.
    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;

        let mut meta_pairs = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let Some(rest) = line.trim_start().strip_prefix('#') else {
                break;
            };
            let Some((key, value)) = rest.trim().split_once('=') else {
                return Err(Error::Csv {
                    line: i as u64 + 1,
                    message: format!("metadata line `{line}` is not `# key=value`"),
                });
            };
            meta_pairs.insert(key.trim().to_string(), (i as u64 + 1, value.trim().to_string()));
        }
        let meta = QTableMeta::from_pairs(&meta_pairs)?;

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(csv_parse)?.clone();
        if header.iter().map(str::trim).ne(QTABLE_HEADER) {
            return Err(Error::Csv {
                line: header.position().map_or(1, |p| p.line()),
                message: format!("expected header `{}`", QTABLE_HEADER.join(",")),
            });
        }

        let mut values = [[0.0; NUM_ACTIONS]; NUM_STATES];
        let mut rows = 0usize;
        for record in reader.records() {
            let record = record.map_err(csv_parse)?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |message: String| Error::Csv { line, message };
            if record.len() != QTABLE_HEADER.len() {
                return Err(bad(format!(
                    "expected {} columns, found {}",
                    QTABLE_HEADER.len(),
                    record.len()
                )));
            }
            if rows == NUM_STATES {
                return Err(bad(format!("more than {NUM_STATES} data rows")));
            }
            let ints: Vec<usize> = (0..4)
                .map(|c| parse_field::<usize>(&record[c], QTABLE_HEADER[c]).map_err(&bad))
                .collect::<Result<_>>()?;
            if ints[0] != rows {
                return Err(bad(format!("expected state {rows}, found {}", ints[0])));
            }
            let obs = decode_state(rows)?;
            if [obs.gaze.code(), obs.smile.code(), obs.answer.code()] != ints[1..4] {
                return Err(bad(format!(
                    "gaze/smile/answer codes do not match state {rows}"
                )));
            }
            for a in 0..NUM_ACTIONS {
                let v: f64 = parse_field(&record[4 + a], QTABLE_HEADER[4 + a]).map_err(&bad)?;
                if !v.is_finite() {
                    return Err(bad(format!("{} is not finite ({v})", QTABLE_HEADER[4 + a])));
                }
                values[rows][a] = v;
            }
            rows += 1;
        }
        if rows != NUM_STATES {
            return Err(Error::Csv {
                line: text.lines().count() as u64,
                message: format!("expected {NUM_STATES} data rows, found {rows}"),
            });
        }
        Ok(Self { values, meta })
    }
}

fn parse_field<T: FromStr>(raw: &str, column: &str) -> std::result::Result<T, String> {
    raw.trim()
        .parse()
        .map_err(|_| format!("cannot parse {column} value `{raw}`"))
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(e.into())
}

fn csv_parse(e: csv::Error) -> Error {
    Error::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

impl QTableMeta {
    fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = Vec::new();
        if let Some(name) = &self.model_name {
            pairs.push(("model", name.clone()));
        }
        if let Some(seed) = self.seed {
            pairs.push(("seed", seed.to_string()));
        }
        pairs.push(("epochs_trained", self.epochs_trained.to_string()));
        if let Some(t) = &self.training {
            pairs.extend([
                ("alpha", t.alpha.to_string()),
                ("gamma", t.gamma.to_string()),
                ("epsilon0", t.epsilon0.to_string()),
                ("epsilon_decay", t.epsilon_decay.to_string()),
                ("epsilon_floor", t.epsilon_floor.to_string()),
                ("epochs", t.epochs.to_string()),
                ("episodes_per_epoch", t.episodes_per_epoch.to_string()),
                ("steps_per_episode", t.steps_per_episode.to_string()),
            ]);
        }
        if let Some(r) = &self.reward {
            pairs.extend([
                ("r_high", r.r_high.to_string()),
                ("r_medium", r.r_medium.to_string()),
                ("r_low", r.r_low.to_string()),
                ("correct_bonus", r.correct_bonus.to_string()),
                ("wrong_bonus", r.wrong_bonus.to_string()),
                ("step_penalty", r.step_penalty.to_string()),
            ]);
        }
        pairs
    }

    fn from_pairs(pairs: &BTreeMap<String, (u64, String)>) -> Result<Self> {
        fn get<T: FromStr>(pairs: &BTreeMap<String, (u64, String)>, key: &str) -> Result<Option<T>> {
            match pairs.get(key) {
                None => Ok(None),
                Some((line, raw)) => raw.parse().map(Some).map_err(|_| Error::Csv {
                    line: *line,
                    message: format!("cannot parse metadata {key}=`{raw}`"),
                }),
            }
        }

        let training = match (
            get(pairs, "alpha")?,
            get(pairs, "gamma")?,
            get(pairs, "epsilon0")?,
            get(pairs, "epsilon_decay")?,
            get(pairs, "epsilon_floor")?,
            get(pairs, "epochs")?,
            get(pairs, "episodes_per_epoch")?,
            get(pairs, "steps_per_episode")?,
        ) {
            (Some(alpha), Some(gamma), Some(epsilon0), Some(epsilon_decay), Some(epsilon_floor), Some(epochs), Some(episodes_per_epoch), Some(steps_per_episode)) => {
                Some(TrainingConfig {
                    alpha,
                    gamma,
                    epsilon0,
                    epsilon_decay,
                    epsilon_floor,
                    epochs,
                    episodes_per_epoch,
                    steps_per_episode,
                })
            }
            _ => None,
        };
        let reward = match (
            get(pairs, "r_high")?,
            get(pairs, "r_medium")?,
            get(pairs, "r_low")?,
            get(pairs, "correct_bonus")?,
            get(pairs, "wrong_bonus")?,
            get(pairs, "step_penalty")?,
        ) {
            (Some(r_high), Some(r_medium), Some(r_low), Some(correct_bonus), Some(wrong_bonus), Some(step_penalty)) => {
                Some(RewardParams {
                    r_high,
                    r_medium,
                    r_low,
                    correct_bonus,
                    wrong_bonus,
                    step_penalty,
                })
            }
            _ => None,
        };
        Ok(Self {
            model_name: get(pairs, "model")?,
            seed: get(pairs, "seed")?,
            epochs_trained: get(pairs, "epochs_trained")?.unwrap_or(0),
            training,
            reward,
        })
    }
}
