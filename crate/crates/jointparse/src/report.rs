//! Machine-readable evaluation reports. Values are percentages.

use std::fmt::Write as _;

use jointparse_core::eval::{Report, METRICS};
use serde::{Deserialize, Serialize};

/// Scores of one document or of a whole corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub seg_p: f64,
    pub seg_r: f64,
    pub seg_f1: f64,
    pub struct_p: f64,
    pub struct_r: f64,
    pub struct_f1: f64,
    pub nuc_p: f64,
    pub nuc_r: f64,
    pub nuc_f1: f64,
    pub rel_p: f64,
    pub rel_r: f64,
    pub rel_f1: f64,
    pub const_p: f64,
    pub const_r: f64,
    pub const_f1: f64,
    pub disc_p: f64,
    pub disc_r: f64,
    pub disc_f1: f64,
    pub overall_p: f64,
    pub overall_r: f64,
    pub overall_f1: f64,
}

impl From<&Report> for Record {
    fn from(r: &Report) -> Self {
        let s = r.scores();
        let v = |k: usize| s[k].1.percent();
        let [seg_p, seg_r, seg_f1] = v(0);
        let [struct_p, struct_r, struct_f1] = v(1);
        let [nuc_p, nuc_r, nuc_f1] = v(2);
        let [rel_p, rel_r, rel_f1] = v(3);
        let [const_p, const_r, const_f1] = v(4);
        let [disc_p, disc_r, disc_f1] = v(5);
        let [overall_p, overall_r, overall_f1] = v(6);
        Record {
            seg_p,
            seg_r,
            seg_f1,
            struct_p,
            struct_r,
            struct_f1,
            nuc_p,
            nuc_r,
            nuc_f1,
            rel_p,
            rel_r,
            rel_f1,
            const_p,
            const_r,
            const_f1,
            disc_p,
            disc_r,
            disc_f1,
            overall_p,
            overall_r,
            overall_f1,
        }
    }
}

impl Record {
    /// `(metric, [p, r, f1])` in report order.
    pub fn rows(&self) -> [(&'static str, [f64; 3]); 7] {
        let v = [
            [self.seg_p, self.seg_r, self.seg_f1],
            [self.struct_p, self.struct_r, self.struct_f1],
            [self.nuc_p, self.nuc_r, self.nuc_f1],
            [self.rel_p, self.rel_r, self.rel_f1],
            [self.const_p, self.const_r, self.const_f1],
            [self.disc_p, self.disc_r, self.disc_f1],
            [self.overall_p, self.overall_r, self.overall_f1],
        ];
        let mut out = [("", [0.0; 3]); 7];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (METRICS[k], v[k]);
        }
        out
    }
}

/// Per-document records in input order plus the micro-average.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub documents: Vec<Record>,
    pub micro: Record,
}

impl EvalReport {
    pub fn new(docs: &[Report]) -> Self {
        EvalReport {
            documents: docs.iter().map(Record::from).collect(),
            micro: Record::from(&Report::micro(docs)),
        }
    }
}

/// The corpus scores as an aligned text table.
pub fn table(micro: &Record) -> String {
    let mut out = String::from("metric        P       R      F1\n");
    for (name, [p, r, f]) in micro.rows() {
        let _ = writeln!(out, "{name:<8} {p:>7.2} {r:>7.2} {f:>7.2}");
    }
    out
}
