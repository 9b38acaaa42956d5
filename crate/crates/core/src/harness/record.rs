//! Trajectory rows and their CSV form.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};

pub const CSV_HEADER: [&str; 12] = [
    "seed",
    "episode",
    "period",
    "regime_id",
    "belief",
    "pi",
    "i",
    "m",
    "reward",
    "sigma",
    "critic_loss",
    "actor_objective",
];

/// One simulated period. `critic_loss` and `actor_objective` are zero in
/// periods without a learning update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub episode: usize,
    pub period: usize,
    pub regime_id: usize,
    pub belief: f64,
    pub pi: f64,
    pub i: f64,
    pub m: f64,
    pub reward: f64,
    pub sigma: f64,
    pub critic_loss: f64,
    pub actor_objective: f64,
}

impl TrajectoryRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.belief,
            self.pi,
            self.i,
            self.m,
            self.reward,
            self.sigma,
            self.critic_loss,
            self.actor_objective,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Formats `x` with 12 significant digits, dropping trailing zeros.
/// Plain notation for exponents in `-5..12`, scientific otherwise.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(out: W, records: &[TrajectoryRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.episode.to_string(),
            r.period.to_string(),
            r.regime_id.to_string(),
            format_sig12(r.belief),
            format_sig12(r.pi),
            format_sig12(r.i),
            format_sig12(r.m),
            format_sig12(r.reward),
            format_sig12(r.sigma),
            format_sig12(r.critic_loss),
            format_sig12(r.actor_objective),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let file = File::create(path)?;
    write_csv(BufWriter::new(file), records)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrajectoryRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(HarnessError::MalformedCsv {
            row: 0,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        let bad = |field: &str| HarnessError::MalformedCsv {
            row,
            message: format!("cannot parse {field}"),
        };
        let int = |idx: usize| rec[idx].parse::<u64>().map_err(|_| bad(CSV_HEADER[idx]));
        let float = |idx: usize| rec[idx].parse::<f64>().map_err(|_| bad(CSV_HEADER[idx]));
        out.push(TrajectoryRecord {
            seed: int(0)?,
            episode: int(1)? as usize,
            period: int(2)? as usize,
            regime_id: int(3)? as usize,
            belief: float(4)?,
            pi: float(5)?,
            i: float(6)?,
            m: float(7)?,
            reward: float(8)?,
            sigma: float(9)?,
            critic_loss: float(10)?,
            actor_objective: float(11)?,
        });
    }
    Ok(out)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    read_csv(File::open(path)?)
}
