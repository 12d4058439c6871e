//! Verification reports: per-instance records, aggregates, named checks,
//! optional regression envelopes and a verdict, serialized canonically
//! (sorted keys, shortest round-trip floats).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::CorpusSpec;
use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = concat!("wonc ", env!("CARGO_PKG_VERSION"));

/// Head-room applied to baseline aggregates when deriving envelopes.
pub const ENVELOPE_HEADROOM: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Informative,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Informative => "informative",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub input_hash: String,
    pub ratios: BTreeMap<String, f64>,
    pub skipped: bool,
}

impl InstanceRecord {
    pub fn skipped(index: usize, input_hash: String) -> Self {
        InstanceRecord {
            index,
            input_hash,
            ratios: BTreeMap::new(),
            skipped: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub max: f64,
    pub min: f64,
    pub median: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Aggregate> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Some(Aggregate {
            count: n,
            max: v[n - 1],
            min: v[0],
            median,
        })
    }
}

/// Outcome of one named check: a metric that must stay ≤ `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub evaluated: usize,
    pub violations: usize,
    /// Largest metric seen (or the tolerance-free minimum when nothing ran).
    pub worst: f64,
    pub tolerance: f64,
}

/// Accumulates metric samples for one check.
#[derive(Clone, Copy, Debug)]
pub struct Check {
    tolerance: f64,
    evaluated: usize,
    violations: usize,
    worst: f64,
}

impl Check {
    pub fn new(tolerance: f64) -> Self {
        Check {
            tolerance,
            evaluated: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    pub fn record(&mut self, metric: f64) {
        self.evaluated += 1;
        // NaN counts as a violation
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(metric <= self.tolerance) {
            self.violations += 1;
        }
        if metric > self.worst || metric.is_nan() {
            self.worst = metric;
        }
    }

    pub fn merge(&mut self, other: &Check) {
        self.evaluated += other.evaluated;
        self.violations += other.violations;
        if other.worst > self.worst || other.worst.is_nan() {
            self.worst = other.worst;
        }
    }

    pub fn summary(&self) -> CheckSummary {
        CheckSummary {
            evaluated: self.evaluated,
            violations: self.violations,
            worst: if self.evaluated == 0 || !self.worst.is_finite() { 0.0 } else { self.worst },
            tolerance: self.tolerance,
        }
    }
}

/// Named checks collected while running a suite.
#[derive(Clone, Debug, Default)]
pub struct CheckSet {
    checks: BTreeMap<String, Check>,
}

impl CheckSet {
    pub fn declare(&mut self, name: &str, tolerance: f64) {
        self.checks.entry(name.to_string()).or_insert_with(|| Check::new(tolerance));
    }

    /// Records a metric; the check must have been declared.
    pub fn record(&mut self, name: &str, metric: f64) {
        self.checks
            .get_mut(name)
            .unwrap_or_else(|| panic!("undeclared check {name}"))
            .record(metric);
    }

    pub fn merge(&mut self, other: &CheckSet) {
        for (k, c) in &other.checks {
            match self.checks.get_mut(k) {
                Some(mine) => mine.merge(c),
                None => {
                    self.checks.insert(k.clone(), *c);
                }
            }
        }
    }

    pub fn summaries(&self) -> BTreeMap<String, CheckSummary> {
        self.checks.iter().map(|(k, c)| (k.clone(), c.summary())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    TwoSided,
    UpperOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upper: Option<f64>,
}

impl Bound {
    pub fn contains(&self, v: f64) -> bool {
        self.lower.is_none_or(|l| v >= l) && self.upper.is_none_or(|u| v <= u)
    }

    /// Excess outside the bound relative to the violated end (≤ 0 inside).
    pub fn excess(&self, v: f64) -> f64 {
        let lo = self.lower.map_or(f64::NEG_INFINITY, |l| (l - v) / l.abs().max(f64::MIN_POSITIVE));
        let hi = self.upper.map_or(f64::NEG_INFINITY, |u| (v - u) / u.abs().max(f64::MIN_POSITIVE));
        lo.max(hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub source: String,
    pub headroom: f64,
    pub bounds: BTreeMap<String, Bound>,
}

impl Envelope {
    /// [min/h, max·h] or (−∞, max·h] per key, from a baseline's aggregates.
    pub fn from_baseline(baseline: &VerificationReport, kinds: &BTreeMap<String, BoundKind>, source: &str) -> Envelope {
        let h = ENVELOPE_HEADROOM;
        let bounds = kinds
            .iter()
            .filter_map(|(key, kind)| {
                let agg = baseline.aggregate.get(key)?;
                let lower = match kind {
                    BoundKind::TwoSided => Some(agg.min / h),
                    BoundKind::UpperOnly => None,
                };
                Some((key.clone(), Bound { lower, upper: Some(agg.max * h) }))
            })
            .collect();
        Envelope {
            source: source.to_string(),
            headroom: h,
            bounds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub phi: String,
    pub corpus: Option<CorpusSpec>,
    pub options: BTreeMap<String, Value>,
    pub records: Vec<InstanceRecord>,
    pub aggregate: BTreeMap<String, Aggregate>,
    pub checks: BTreeMap<String, CheckSummary>,
    pub envelope: Option<Envelope>,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
    pub regime: String,
    pub tool_version: String,
}

impl VerificationReport {
    /// Builds a report, computing aggregates from the records and the verdict.
    /// `envelope_required` marks suites whose verdict is only a pass when an
    /// envelope was supplied; `informative` forces at best an informative verdict.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        suite: &str,
        phi: String,
        corpus: Option<CorpusSpec>,
        options: BTreeMap<String, Value>,
        records: Vec<InstanceRecord>,
        checks: &CheckSet,
        regime: String,
        warnings: Vec<String>,
        informative: bool,
        envelope_required: bool,
    ) -> VerificationReport {
        let mut report = VerificationReport {
            suite: suite.to_string(),
            phi,
            corpus,
            options,
            aggregate: aggregate_records(&records),
            records,
            checks: checks.summaries(),
            envelope: None,
            verdict: Verdict::Informative,
            warnings,
            regime,
            tool_version: TOOL_VERSION.to_string(),
        };
        report.options.insert("informative".into(), Value::Bool(informative));
        report.options.insert("envelope_required".into(), Value::Bool(envelope_required));
        report.verdict = report.compute_verdict();
        report
    }

    fn flag(&self, name: &str) -> bool {
        self.options.get(name).and_then(Value::as_bool).unwrap_or(false)
    }

    fn compute_verdict(&self) -> Verdict {
        let failed_checks = self.checks.values().any(|c| c.violations > 0);
        let informative = self.flag("informative");
        if failed_checks && !informative {
            return Verdict::Fail;
        }
        if informative {
            // an exact identity failing is still a failure
            let hard_fail = self
                .checks
                .iter()
                .any(|(k, c)| c.violations > 0 && !k.starts_with("envelope:"));
            return if hard_fail { Verdict::Fail } else { Verdict::Informative };
        }
        match (&self.envelope, self.flag("envelope_required")) {
            (Some(_), _) | (None, false) => Verdict::Pass,
            (None, true) => Verdict::Informative,
        }
    }

    /// Checks every record against the envelope and recomputes the verdict.
    pub fn apply_envelope(&mut self, envelope: Envelope) {
        for (key, bound) in &envelope.bounds {
            let mut check = Check::new(0.0);
            for r in self.records.iter().filter(|r| !r.skipped) {
                if let Some(&v) = r.ratios.get(key) {
                    check.record(bound.excess(v));
                }
            }
            self.checks.insert(format!("envelope:{key}"), check.summary());
        }
        self.envelope = Some(envelope);
        self.verdict = self.compute_verdict();
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::NumericalFailure(format!("report serialization: {e}")))?;
        let mut out = serde_json::to_string_pretty(&value).map_err(|e| Error::NumericalFailure(format!("report serialization: {e}")))?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<VerificationReport> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("not a verification report: {e}")))
    }

    /// Header and rows for a per-instance CSV export.
    pub fn csv_table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let keys: Vec<String> = self.aggregate.keys().cloned().collect();
        let mut header = vec!["index".to_string(), "input_hash".to_string(), "skipped".to_string()];
        header.extend(keys.iter().cloned());
        let rows = self
            .records
            .iter()
            .map(|r| {
                let mut row = vec![r.index.to_string(), r.input_hash.clone(), r.skipped.to_string()];
                row.extend(keys.iter().map(|k| r.ratios.get(k).map(|v| v.to_string()).unwrap_or_default()));
                row
            })
            .collect();
        (header, rows)
    }
}

/// Aggregates per ratio key over non-skipped records, in index order.
pub fn aggregate_records(records: &[InstanceRecord]) -> BTreeMap<String, Aggregate> {
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.skipped) {
        for (k, &v) in &r.ratios {
            values.entry(k.clone()).or_default().push(v);
        }
    }
    values
        .into_iter()
        .filter_map(|(k, v)| Aggregate::of(&v).map(|a| (k, a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: usize, v: f64) -> InstanceRecord {
        InstanceRecord {
            index: i,
            input_hash: format!("h{i}"),
            ratios: [("ratio".to_string(), v)].into_iter().collect(),
            skipped: false,
        }
    }

    fn report(values: &[f64], checks: &CheckSet, informative: bool, required: bool) -> VerificationReport {
        VerificationReport::assemble(
            "demo",
            "pow:2".into(),
            None,
            BTreeMap::new(),
            values.iter().enumerate().map(|(i, &v)| record(i, v)).collect(),
            checks,
            "high".into(),
            vec![],
            informative,
            required,
        )
    }

    #[test]
    fn aggregates() {
        let a = Aggregate::of(&[3.0, 1.0, 2.0, 10.0]).unwrap();
        assert_eq!((a.count, a.min, a.max, a.median), (4, 1.0, 10.0, 2.5));
        assert_eq!(Aggregate::of(&[2.0, 1.0, 5.0]).unwrap().median, 2.0);
        assert!(Aggregate::of(&[]).is_none());
        let mut recs = vec![record(0, 1.0), InstanceRecord::skipped(1, "x".into())];
        recs.push(record(2, 3.0));
        assert_eq!(aggregate_records(&recs)["ratio"].count, 2);
    }

    #[test]
    fn verdict_rules() {
        let mut ok = CheckSet::default();
        ok.declare("c", 1e-9);
        ok.record("c", 0.0);
        assert_eq!(report(&[1.0], &ok, false, false).verdict, Verdict::Pass);
        assert_eq!(report(&[1.0], &ok, false, true).verdict, Verdict::Informative);
        assert_eq!(report(&[1.0], &ok, true, false).verdict, Verdict::Informative);
        let mut bad = ok.clone();
        bad.record("c", 1.0);
        assert_eq!(report(&[1.0], &bad, false, false).verdict, Verdict::Fail);
        assert_eq!(report(&[1.0], &bad, true, false).verdict, Verdict::Fail);
        let mut nan = CheckSet::default();
        nan.declare("c", 1.0);
        nan.record("c", f64::NAN);
        assert_eq!(report(&[1.0], &nan, false, false).verdict, Verdict::Fail);
    }

    #[test]
    fn envelope_from_baseline_and_application() {
        let base = report(&[1.0, 2.0, 4.0], &CheckSet::default(), false, true);
        let kinds = [("ratio".to_string(), BoundKind::TwoSided)].into_iter().collect();
        let env = Envelope::from_baseline(&base, &kinds, "demo.json");
        assert_eq!(env.bounds["ratio"], Bound { lower: Some(1.0 / 1.5), upper: Some(6.0) });
        let mut inside = report(&[0.8, 5.0], &CheckSet::default(), false, true);
        inside.apply_envelope(env.clone());
        assert_eq!(inside.verdict, Verdict::Pass);
        let mut outside = report(&[0.5, 5.0], &CheckSet::default(), false, true);
        outside.apply_envelope(env.clone());
        assert_eq!(outside.verdict, Verdict::Fail);
        assert_eq!(outside.checks["envelope:ratio"].violations, 1);
        let mut off_regime = report(&[0.5], &CheckSet::default(), true, true);
        off_regime.apply_envelope(env);
        assert_eq!(off_regime.verdict, Verdict::Informative);
        let upper = Envelope::from_baseline(&base, &[("ratio".to_string(), BoundKind::UpperOnly)].into_iter().collect(), "x");
        assert_eq!(upper.bounds["ratio"].lower, None);
    }

    #[test]
    fn canonical_json_is_sorted_and_round_trips() {
        let r = report(&[0.1, 1.0 / 3.0], &CheckSet::default(), false, false);
        let text = r.to_canonical_json().unwrap();
        assert_eq!(VerificationReport::from_json(&text).unwrap(), r);
        let top: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \"") )
            .map(|l| l.trim_start().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = top.clone();
        sorted.sort();
        assert_eq!(top, sorted);
        assert!(text.contains("0.3333333333333333"));
        assert_eq!(text, r.to_canonical_json().unwrap());
    }

    #[test]
    fn csv_table_shape() {
        let r = report(&[0.5, 2.0], &CheckSet::default(), false, false);
        let (h, rows) = r.csv_table();
        assert_eq!(h, vec!["index", "input_hash", "skipped", "ratio"]);
        assert_eq!(rows[1], vec!["1", "h1", "false", "2"]);
    }
}
