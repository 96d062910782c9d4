use std::io::Write;

use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 10] = [
    "iter",
    "epsilon",
    "disc_loss",
    "gen_loss",
    "train_acc",
    "test_acc",
    "contradiction_rate",
    "entropy_bits",
    "mean_residual",
    "frechet_proxy",
];

/// One logging point. `iter` counts completed iterations; `epsilon` is the
/// value used by the last of them. `None` fields are left blank in CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsRecord {
    pub iter: u64,
    pub epsilon: f64,
    pub disc_loss: f64,
    pub gen_loss: Option<f64>,
    pub train_acc: f64,
    pub test_acc: Option<f64>,
    pub contradiction_rate: Option<f64>,
    pub entropy_bits: Option<f64>,
    pub mean_residual: Option<f64>,
    pub frechet_proxy: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsLog {
    records: Vec<MetricsRecord>,
}

/// Fixed 4-decimal rendering; negative zero prints as zero.
pub fn fmt4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

fn opt4(v: Option<f64>) -> String {
    v.map(fmt4).unwrap_or_default()
}

impl MetricsLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rec: MetricsRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if rec.iter <= last.iter {
                return Err(Error::Consistency(format!(
                    "log iteration {} after {}",
                    rec.iter, last.iter
                )));
            }
        }
        self.records.push(rec);
        Ok(())
    }

    pub fn records(&self) -> &[MetricsRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&MetricsRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Header row plus one row per record. Each `comment` line is written
    /// first, prefixed with `# `.
    pub fn write_csv<W: Write>(&self, out: &mut W, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", CSV_COLUMNS.join(","))?;
        for r in &self.records {
            let fields = [
                r.iter.to_string(),
                fmt4(r.epsilon),
                fmt4(r.disc_loss),
                opt4(r.gen_loss),
                fmt4(r.train_acc),
                opt4(r.test_acc),
                opt4(r.contradiction_rate),
                opt4(r.entropy_bits),
                opt4(r.mean_residual),
                opt4(r.frechet_proxy),
            ];
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}
