//! Verification suites. Each suite draws a seeded corpus, evaluates its
//! ratios and exact checks per instance (possibly in parallel), and
//! assembles a [`VerificationReport`] from the index-ordered results.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::corpus::{generate_member, matrix_hash, CorpusSpec, Ensemble};
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::interpolation::{instrument_decomposition, interpolation_pair, parse_operator, QuasilinearOperator};
use crate::linalg::CMatrix;
use crate::martingale::{bg_decomposition_bound, bg_ratio, martingale_from_final, stein_map, transform, DyadicFiltration};
use crate::norms::{
    banach_renorm, column_square_spectrum, luxemburg_norm, phi_moment, row_square_spectrum, sup_moment_at, weak_lp_norm,
    weak_orlicz_norm, weak_orlicz_norm_lambda,
};
use crate::numeric::log_grid;
use crate::orlicz::{IndexRegime, OrliczFunction};
use crate::rademacher::{decomposition_infimum_bound, khintchine_lhs, rademacher_spectrum, rc_sum_norm, RademacherSystem};
use crate::report::{BoundKind, CheckSet, Envelope, InstanceRecord, VerificationReport};
use crate::spectral::{singular_spectrum, SingularSpectrum, TracialMatrix};
use crate::torus::{
    default_samples, delta_multiplier, fourier_coefficient, fourier_coefficient_dft, lacunary_band, lacunary_bands_up_to,
    torus_column_square_spectrum, torus_spectrum, OperatorTrigPolynomial,
};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_INSTANCES: usize = 200;
pub const DEFAULT_DIM: usize = 4;
pub const DEFAULT_LEVELS: usize = 3;
pub const DEFAULT_K: usize = 4;
pub const DEFAULT_DEGREE: usize = 27;
pub const DEFAULT_BUDGET: usize = 32;

/// Number of polynomials in the square-function family of the Fourier suite.
const FOURIER_FAMILY: usize = 3;
const KOLMOGOROV_GRID: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Norms,
    Interp,
    Transform,
    Stein,
    Bg,
    Khintchine,
    Fourier,
    Indices,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Norms,
        Suite::Interp,
        Suite::Transform,
        Suite::Stein,
        Suite::Bg,
        Suite::Khintchine,
        Suite::Fourier,
        Suite::Indices,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Norms => "norms",
            Suite::Interp => "interp",
            Suite::Transform => "transform",
            Suite::Stein => "stein",
            Suite::Bg => "bg",
            Suite::Khintchine => "khintchine",
            Suite::Fourier => "fourier",
            Suite::Indices => "indices",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegimeChoice {
    Auto,
    Low,
    High,
}

impl FromStr for RegimeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(RegimeChoice::Auto),
            "low" => Ok(RegimeChoice::Low),
            "high" => Ok(RegimeChoice::High),
            other => Err(invalid(format!("unknown regime {other:?}"))),
        }
    }
}

impl fmt::Display for RegimeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegimeChoice::Auto => "auto",
            RegimeChoice::Low => "low",
            RegimeChoice::High => "high",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub suite: Suite,
    pub phi: OrliczFunction,
    pub corpus: CorpusSpec,
    pub op: String,
    pub levels: usize,
    pub k: usize,
    pub regime: RegimeChoice,
    pub degree: usize,
    pub budget: usize,
    pub exec: Exec,
}

impl SuiteOptions {
    pub fn new(suite: Suite, phi: OrliczFunction) -> Self {
        SuiteOptions {
            suite,
            phi,
            corpus: CorpusSpec {
                seed: DEFAULT_SEED,
                instances: DEFAULT_INSTANCES,
                dim: DEFAULT_DIM,
                ensemble: Ensemble::ComplexGinibre,
                scale: 1.0,
            },
            op: "hardy".into(),
            levels: DEFAULT_LEVELS,
            k: DEFAULT_K,
            regime: RegimeChoice::Auto,
            degree: DEFAULT_DEGREE,
            budget: DEFAULT_BUDGET,
            exec: Exec::default(),
        }
    }
}

fn regime_name(r: IndexRegime) -> String {
    match r {
        IndexRegime::Low => "low",
        IndexRegime::High => "high",
        IndexRegime::OpenStrip => "open_strip",
        IndexRegime::Degenerate => "degenerate",
    }
    .into()
}

/// File name of the committed baseline for a suite run, e.g.
/// `interp__hardy__plog_2_1.json`.
pub fn baseline_name(opts: &SuiteOptions) -> String {
    let phi: String = opts
        .phi
        .to_string()
        .chars()
        .map(|c| if c == ':' || c == ',' { '_' } else { c })
        .collect();
    match opts.suite {
        Suite::Interp => format!("interp__{}__{phi}.json", opts.op.replace(':', "_")),
        s => format!("{s}__{phi}.json"),
    }
}

/// Which ratio keys of a suite are regression-tested and how.
pub fn envelope_kinds(suite: Suite) -> BTreeMap<String, BoundKind> {
    use BoundKind::*;
    let pairs: &[(&str, BoundKind)] = match suite {
        Suite::Norms => &[("banach_over_weak", TwoSided)],
        Suite::Interp => &[("ratio", UpperOnly), ("ratio@0.25", UpperOnly), ("ratio@4", UpperOnly)],
        Suite::Transform => &[("ratio_min", TwoSided), ("ratio_max", TwoSided), ("alternating", TwoSided)],
        Suite::Stein => &[("column_ratio", UpperOnly), ("row_ratio", UpperOnly)],
        Suite::Bg => &[("lhs_over_rhs", TwoSided), ("lhs_over_bound", UpperOnly)],
        Suite::Khintchine => &[("lhs_over_rc", TwoSided), ("lhs_over_bound", UpperOnly)],
        Suite::Fourier => &[("coef_ratio", UpperOnly), ("coef_square_ratio", UpperOnly), ("lacunary_ratio", UpperOnly)],
        Suite::Indices => &[],
    };
    pairs.iter().map(|(k, b)| (k.to_string(), *b)).collect()
}

pub fn envelope_from_baseline(suite: Suite, baseline: &VerificationReport, source: &str) -> Envelope {
    Envelope::from_baseline(baseline, &envelope_kinds(suite), source)
}

/// Per-instance outcome before assembly.
struct Outcome {
    record: InstanceRecord,
    checks: CheckSet,
}

impl Outcome {
    fn new(index: usize, inputs: &[&TracialMatrix]) -> Self {
        Outcome {
            record: InstanceRecord {
                index,
                input_hash: matrix_hash(inputs),
                ratios: BTreeMap::new(),
                skipped: false,
            },
            checks: CheckSet::default(),
        }
    }

    fn ratio(&mut self, key: &str, v: f64) {
        self.record.ratios.insert(key.to_string(), v);
    }

    fn check(&mut self, name: &str, tolerance: f64, metric: f64) {
        self.checks.declare(name, tolerance);
        self.checks.record(name, metric);
    }

    fn skip(mut self) -> Self {
        self.record.ratios.clear();
        self.record.skipped = true;
        self
    }
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Runs a suite without an envelope.
pub fn run_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    opts.corpus.validate()?;
    match opts.suite {
        Suite::Norms => norms_suite(opts),
        Suite::Interp => interp_suite(opts),
        Suite::Transform => transform_suite(opts),
        Suite::Stein => stein_suite(opts),
        Suite::Bg => bg_suite(opts),
        Suite::Khintchine => khintchine_suite(opts),
        Suite::Fourier => fourier_suite(opts),
        Suite::Indices => indices_suite(opts),
    }
}

struct Assembly<'a> {
    opts: &'a SuiteOptions,
    corpus: Option<CorpusSpec>,
    options: BTreeMap<String, Value>,
    warnings: Vec<String>,
    informative: bool,
    envelope_required: bool,
}

impl<'a> Assembly<'a> {
    fn new(opts: &'a SuiteOptions, corpus: Option<CorpusSpec>) -> Self {
        Assembly {
            opts,
            corpus,
            options: BTreeMap::new(),
            warnings: Vec::new(),
            informative: false,
            envelope_required: !matches!(opts.suite, Suite::Norms | Suite::Indices),
        }
    }

    fn warn(&mut self, msg: String) {
        self.warnings.push(msg);
        self.informative = true;
    }

    fn finish(self, outcomes: Vec<Outcome>) -> VerificationReport {
        let mut checks = CheckSet::default();
        let mut records = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            checks.merge(&o.checks);
            records.push(o.record);
        }
        VerificationReport::assemble(
            self.opts.suite.name(),
            self.opts.phi.to_string(),
            self.corpus,
            self.options,
            records,
            &checks,
            regime_name(self.opts.phi.indices().regime()),
            self.warnings,
            self.informative,
            self.envelope_required,
        )
    }
}

// ---------------------------------------------------------------- norms

fn kolmogorov_and_subadditivity(o: &mut Outcome, sx: &SingularSpectrum, sy: &SingularSpectrum, ssum: &SingularSpectrum) {
    let top = sx.values()[0].max(sy.values()[0]).max(f64::MIN_POSITIVE);
    let grid = log_grid(top * 1e-3, top * 2.0, KOLMOGOROV_GRID);
    for &s in &grid {
        for p in [1.0, 2.0, 4.0] {
            let bound = (sx.lp_norm(p) / s).powf(p);
            o.check("kolmogorov", 1e-12, (sx.lambda_at(s) - bound) / bound.max(f64::MIN_POSITIVE));
        }
        o.check(
            "subadditivity",
            1e-12,
            ssum.lambda_at(2.0 * s) - (sx.lambda_at(s / 2.0) + sy.lambda_at(s / 2.0)),
        );
        for &t in &grid {
            o.check(
                "subadditivity_standard",
                1e-12,
                ssum.lambda_at(s + t) - (sx.lambda_at(s) + sy.lambda_at(t)),
            );
        }
    }
}

fn norms_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    let phi = &opts.phi;
    let spec = opts.corpus;
    let idx = phi.indices();
    let banach_is_norm = idx.is_reflexive_range();
    let mut asm = Assembly::new(opts, Some(spec));
    if !banach_is_norm {
        asm.warnings.push(format!(
            "indices ({}, {}) outside 1 < a ≤ b < ∞: Banach triangle check skipped",
            idx.lower, idx.upper
        ));
    }
    let outcomes = opts.exec.try_map_range(spec.instances, |i| -> Result<Outcome> {
        let x = generate_member(&spec, i, 0)?;
        let y = generate_member(&spec, (i + 1) % spec.instances, 0)?;
        let mut o = Outcome::new(i, &[&x, &y]);
        let sx = singular_spectrum(&x)?;
        if sx.is_zero() {
            return Ok(o.skip());
        }
        let sy = singular_spectrum(&y)?;
        let ssum = singular_spectrum(&x.add(&y)?)?;
        let weak = weak_orlicz_norm(&sx, phi).value;
        let lambda = weak_orlicz_norm_lambda(&sx, phi).value;
        let lux = luxemburg_norm(&sx, phi).value;
        let banach = banach_renorm(&sx, phi).value;
        o.ratio("weak", weak);
        o.ratio("lambda_over_mu", lambda / weak);
        o.ratio("weak_over_luxemburg", weak / lux);
        o.ratio("banach_over_weak", banach / weak);
        o.ratio("moment_at_norm", sup_moment_at(&sx, phi, weak));

        o.check("mu_lambda", 1e-9, relative(lambda, weak));
        o.check("norm_attained", 1e-9, sup_moment_at(&sx, phi, weak) - 1.0);
        o.check("weak_le_luxemburg", 1e-10, (weak - lux) / lux);
        for a in [1.0, 0.5, 0.125] {
            let y = sx.scaled(a / weak);
            o.check("moment_le_norm", 1e-12, phi_moment(&y, phi).value - weak_orlicz_norm(&y, phi).value);
        }
        for a in [0.25, 4.0] {
            let scaled = weak_orlicz_norm(&singular_spectrum(&x.scale_real(a))?, phi).value;
            o.check("homogeneity", 0.0, (scaled - a * weak).abs());
        }
        let wy = weak_orlicz_norm(&sy, phi).value;
        let wsum = weak_orlicz_norm(&ssum, phi).value;
        o.check("quasi_triangle", 0.0, wsum - 2.0 * (weak + wy));
        o.check("banach_ge_weak", 1e-12, (weak - banach) / weak);
        if banach_is_norm {
            let by = banach_renorm(&sy, phi).value;
            let bsum = banach_renorm(&ssum, phi).value;
            o.check("banach_triangle", 1e-8, bsum - banach - by);
        }
        if let crate::orlicz::Family::Power { p } = phi.family() {
            o.check("weak_lp_agreement", 0.0, (weak_lp_norm(&sx, p)?.value - weak).abs());
        }
        kolmogorov_and_subadditivity(&mut o, &sx, &sy, &ssum);
        Ok(o)
    })?;
    Ok(asm_finish(asm, outcomes))
}

fn asm_finish(asm: Assembly<'_>, outcomes: Vec<Outcome>) -> VerificationReport {
    asm.finish(outcomes)
}

// ---------------------------------------------------------------- interp

fn interp_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    let op: Box<dyn QuasilinearOperator> = parse_operator(&opts.op)?;
    let phi = &opts.phi;
    let spec = opts.corpus;
    if interpolation_pair(op.as_ref(), phi).is_none() {
        let idx = phi.indices();
        return Err(Error::PreconditionViolation(format!(
            "indices ({}, {}) of {phi} are not strictly between two certified weak types of {}",
            idx.lower,
            idx.upper,
            op.name()
        )));
    }
    let mut asm = Assembly::new(opts, Some(spec));
    asm.options.insert("op".into(), json!(op.name()));
    let linear = op.is_linear();
    let weak_types = op.certified_weak_types();
    let outcomes = opts.exec.try_map_range(spec.instances, |i| -> Result<Outcome> {
        let x = generate_member(&spec, i, 0)?;
        let mut o = Outcome::new(i, &[&x]);
        let sx = singular_spectrum(&x)?;
        let denom = phi_moment(&sx, phi).value;
        if denom == 0.0 {
            return Ok(o.skip());
        }
        let image = op.image_spectrum(&x)?;
        o.ratio("ratio", phi_moment(&image, phi).value / denom);
        for (a, key) in [(0.25, "ratio@0.25"), (4.0, "ratio@4")] {
            let xa = x.scale_real(a);
            let num = phi_moment(&op.image_spectrum(&xa)?, phi).value;
            o.ratio(key, num / phi_moment(&singular_spectrum(&xa)?, phi).value);
        }
        for w in &weak_types {
            let lp = sx.lp_norm(w.p);
            let name = if w.p.is_finite() { format!("weak_type:{}", w.p) } else { "weak_type:inf".to_string() };
            o.check(&name, 1e-9, weak_lp_norm(&image, w.p)?.value / lp - w.constant);
        }
        if linear {
            let alpha = sx.mu_at(0.5 * sx.total_weight());
            if alpha > 0.0 {
                let l = instrument_decomposition(op.as_ref(), &x, alpha)?;
                o.check("quasilinear_levels", 1e-12, l.image - (l.head + l.tail));
            }
        }
        Ok(o)
    })?;
    Ok(asm.finish(outcomes))
}

// ---------------------------------------------------------------- martingales

fn martingale_spec(opts: &SuiteOptions) -> Result<(DyadicFiltration, CorpusSpec)> {
    let f = DyadicFiltration::new(opts.levels)?;
    Ok((f, CorpusSpec { dim: f.dim(), ..opts.corpus }))
}

fn warn_unless_reflexive(asm: &mut Assembly<'_>, phi: &OrliczFunction) {
    let idx = phi.indices();
    if !idx.is_reflexive_range() {
        asm.warn(format!("indices ({}, {}) outside 1 < a ≤ b < ∞", idx.lower, idx.upper));
    }
}

fn sign_patterns(len: usize) -> Vec<Vec<Complex64>> {
    (0..1usize << len)
        .map(|w| {
            (0..len)
                .map(|k| Complex64::new(if w >> k & 1 == 1 { -1.0 } else { 1.0 }, 0.0))
                .collect()
        })
        .collect()
}

fn scale_of(x: &TracialMatrix) -> f64 {
    1.0 + x.matrix().frobenius()
}

fn conditional_expectation_checks(o: &mut Outcome, f: &DyadicFiltration, x: &TracialMatrix, a: &TracialMatrix, b: &TracialMatrix) -> Result<()> {
    let scale = 1.0 + x.matrix().frobenius();
    for k in 0..=f.levels() {
        let e = f.conditional_expectation(k, x)?;
        o.check("trace_preserving", 1e-10, (e.trace() - x.trace()).norm() / scale);
        o.check("idempotent", 1e-10, f.conditional_expectation(k, &e)?.matrix().max_abs_diff(e.matrix()) / scale);
        o.check("l2_contraction", 1e-10, (e.l2_norm_sq() - x.l2_norm_sq()) / (scale * scale));
        let one = TracialMatrix::new(CMatrix::identity(f.dim()), x.weight())?;
        o.check("unital", 1e-10, f.conditional_expectation(k, &one)?.matrix().max_abs_diff(one.matrix()));
        let pos = f.conditional_expectation(k, &x.with_matrix(x.matrix().gram()))?;
        let min_eig = pos.matrix().hermitian_eigen()?.values.into_iter().fold(f64::INFINITY, f64::min);
        o.check("positivity", 1e-10, -min_eig / (scale * scale));
        for j in 0..=f.levels() {
            let tower = f.conditional_expectation(k, &f.conditional_expectation(j, x)?)?;
            let direct = f.conditional_expectation(k.min(j), x)?;
            o.check("tower", 1e-10, tower.matrix().max_abs_diff(direct.matrix()) / scale);
        }
        let ak = f.conditional_expectation(k, a)?;
        let bk = f.conditional_expectation(k, b)?;
        let axb = ak.mul(&x.mul(&bk)?)?;
        let lhs = f.conditional_expectation(k, &axb)?;
        let rhs = ak.mul(&e.mul(&bk)?)?;
        let s2 = scale * (1.0 + a.matrix().frobenius()) * (1.0 + b.matrix().frobenius());
        o.check("module", 1e-10, lhs.matrix().max_abs_diff(rhs.matrix()) / s2);
    }
    Ok(())
}

fn transform_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    let phi = &opts.phi;
    let (f, spec) = martingale_spec(opts)?;
    let mut asm = Assembly::new(opts, Some(spec));
    asm.options.insert("levels".into(), json!(opts.levels));
    warn_unless_reflexive(&mut asm, phi);
    let patterns = sign_patterns(f.levels() + 1);
    let outcomes = opts.exec.try_map_range(spec.instances, |i| -> Result<Outcome> {
        let x = generate_member(&spec, i, 0)?;
        let a = generate_member(&spec, i, 1)?;
        let b = generate_member(&spec, i, 2)?;
        let mut o = Outcome::new(i, &[&x, &a, &b]);
        conditional_expectation_checks(&mut o, &f, &x, &a, &b)?;
        let mart = martingale_from_final(&f, &x)?;
        let dx = mart.differences();
        let total: f64 = dx.iter().map(|d| d.l2_norm_sq()).sum();
        o.check("pythagoras", 1e-10, relative(total, x.l2_norm_sq()));
        let base = phi_moment(&singular_spectrum(&x)?, phi).value;
        if base == 0.0 {
            return Ok(o.skip());
        }
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for eps in &patterns {
            let t = transform(&mart, eps)?;
            let r = phi_moment(&singular_spectrum(t.final_element())?, phi).value / base;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let alt: Vec<Complex64> = (0..=f.levels()).map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let t = transform(&mart, &alt)?;
        let els = t.elements();
        for k in 0..f.levels() {
            let drift = f.conditional_expectation(k, &els[k + 1])?.matrix().max_abs_diff(els[k].matrix());
            o.check("transform_martingale", 1e-10, drift / scale_of(&x));
        }
        o.ratio("alternating", phi_moment(&singular_spectrum(t.final_element())?, phi).value / base);
        o.ratio("ratio_min", lo);
        o.ratio("ratio_max", hi);
        Ok(o)
    })?;
    Ok(asm.finish(outcomes))
}

fn stein_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    let phi = &opts.phi;
    let (f, spec) = martingale_spec(opts)?;
    let mut asm = Assembly::new(opts, Some(spec));
    asm.options.insert("levels".into(), json!(opts.levels));
    warn_unless_reflexive(&mut asm, phi);
    let outcomes = opts.exec.try_map_range(spec.instances, |i| -> Result<Outcome> {
        let seq: Vec<TracialMatrix> = (0..=f.levels()).map(|m| generate_member(&spec, i, m)).collect::<Result<_>>()?;
        let mut o = Outcome::new(i, &seq.iter().collect::<Vec<_>>());
        let rhs = phi_moment(&column_square_spectrum(&seq)?, phi).value;
        if rhs == 0.0 {
            return Ok(o.skip());
        }
        let col = stein_map(&f, &seq)?;
        let adj: Vec<TracialMatrix> = seq.iter().map(|a| a.adjoint()).collect();
        let row = stein_map(&f, &adj)?;
        o.ratio("column_ratio", phi_moment(&column_square_spectrum(&col)?, phi).value / rhs);
        let row_rhs = phi_moment(&row_square_spectrum(&seq)?, phi).value;
        o.ratio("row_ratio", phi_moment(&row_square_spectrum(&row.iter().map(|e| e.adjoint()).collect::<Vec<_>>())?, phi).value / row_rhs);
        for (e, a) in col.iter().zip(&seq) {
            o.check("stein_trace", 1e-10, (e.trace() - a.trace()).norm() / (1.0 + a.matrix().frobenius()));
        }
        Ok(o)
    })?;
    Ok(asm.finish(outcomes))
}

/// The effective regime and whether it agrees with Φ's indices.
fn resolve_regime(asm: &mut Assembly<'_>, choice: RegimeChoice) -> (bool, bool) {
    let actual = asm.opts.phi.indices().regime();
    let (low, high) = match choice {
        RegimeChoice::Low => (true, false),
        RegimeChoice::High => (false, true),
        RegimeChoice::Auto => match actual {
            IndexRegime::Low => (true, false),
            IndexRegime::High => (false, true),
            _ => (true, true),
        },
    };
    let idx = asm.opts.phi.indices();
    match (choice, actual) {
        (RegimeChoice::Low, IndexRegime::Low) | (RegimeChoice::High, IndexRegime::High) => {}
        (RegimeChoice::Auto, IndexRegime::Low | IndexRegime::High) => {}
        (RegimeChoice::Auto, _) => asm.warn(format!(
            "indices ({}, {}) lie outside both inequality regimes; both forms computed, nothing asserted",
            idx.lower, idx.upper
        )),
        _ => asm.warn(format!(
            "regime mismatch: requested {choice} but indices ({}, {}) give {}",
            idx.lower,
            idx.upper,
            regime_name(actual)
        )),
    }
    if low {
        asm.options.insert("low_regime".into(), json!("forward-only"));
    }
    (low, high)
}

fn bg_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    let phi = &opts.phi;
    let (f, spec) = martingale_spec(opts)?;
    let mut asm = Assembly::new(opts, Some(spec));
    asm.options.insert("levels".into(), json!(opts.levels));
    asm.options.insert("regime".into(), json!(opts.regime.to_string()));
    let (low, high) = resolve_regime(&mut asm, opts.regime);
    if low {
        asm.options.insert("budget".into(), json!(opts.budget));
    }
    let outcomes = opts.exec.try_map_range(spec.instances, |i| -> Result<Outcome> {
        let x = generate_member(&spec, i, 0)?;
        let mut o = Outcome::new(i, &[&x]);
        let mart = martingale_from_final(&f, &x)?;
        let r = bg_ratio(&mart, phi)?;
        if r.lhs == 0.0 {
            return Ok(o.skip());
        }
        if high {
            o.ratio("lhs_over_rhs", r.lhs / r.rhs);
        }
        if low {
            let b = bg_decomposition_bound(&mart, phi, opts.budget)?;
            o.ratio("lhs_over_bound", r.lhs / b.value);
            o.ratio("bound_over_lhs", b.value / r.lhs);
            o.check("bound_le_trivial", 0.0, b.value - b.column_only.min(b.row_only));
        }
        Ok(o)
    })?;
    Ok(asm.finish(outcomes))
}

// ---------------------------------------------------------------- Khintchine

fn khintchine_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    let phi = &opts.phi;
    let spec = opts.corpus;
    if opts.k == 0 || opts.k > crate::rademacher::MAX_RADEMACHER {
        return Err(Error::ResourceLimit(format!(
            "K = {} outside 1..={}",
            opts.k,
            crate::rademacher::MAX_RADEMACHER
        )));
    }
    let mut asm = Assembly::new(opts, Some(spec));
    asm.options.insert("k".into(), json!(opts.k));
    asm.options.insert("regime".into(), json!(opts.regime.to_string()));
    let (low, high) = resolve_regime(&mut asm, opts.regime);
    if low {
        asm.options.insert("budget".into(), json!(opts.budget));
    }
    // patterns are already parallel inside each instance
    let inner = Exec::Sequential;
    let outcomes = opts.exec.try_map_range(spec.instances, |i| -> Result<Outcome> {
        let xs: Vec<TracialMatrix> = (0..opts.k).map(|m| generate_member(&spec, i, m)).collect::<Result<_>>()?;
        let mut o = Outcome::new(i, &xs.iter().collect::<Vec<_>>());
        let sys = RademacherSystem::new(xs.clone())?;
        let spectrum = rademacher_spectrum(&sys, inner)?;
        let l2: f64 = spectrum.values().iter().zip(spectrum.weights()).map(|(v, w)| w * v * v).sum();
        let coeff_l2: f64 = xs.iter().map(|x| x.l2_norm_sq()).sum();
        o.check("l2_orthogonality", 1e-10, relative(l2, coeff_l2));
        let mut flipped = xs.clone();
        flipped[0] = flipped[0].scale_real(-1.0);
        let fs = rademacher_spectrum(&RademacherSystem::new(flipped)?, inner)?;
        o.check("sign_flip", 0.0, if fs == spectrum { 0.0 } else { 1.0 });
        let lhs = khintchine_lhs(&sys, phi, inner)?;
        if lhs == 0.0 {
            return Ok(o.skip());
        }
        if high {
            o.ratio("lhs_over_rc", lhs / rc_sum_norm(&sys, phi)?);
        }
        if low {
            let b = decomposition_infimum_bound(&sys, phi, opts.budget)?;
            o.ratio("lhs_over_bound", lhs / b.value);
            o.ratio("bound_over_lhs", b.value / lhs);
            o.check("bound_le_trivial", 0.0, b.value - b.column_only.min(b.row_only));
        }
        Ok(o)
    })?;
    Ok(asm.finish(outcomes))
}

// ---------------------------------------------------------------- Fourier

fn analytic_polynomial(spec: &CorpusSpec, instance: usize, first_member: usize, degree: usize) -> Result<OperatorTrigPolynomial> {
    let mut f = OperatorTrigPolynomial::zero(spec.dim, 1.0 / spec.dim as f64)?;
    for k in 0..=degree {
        f.set(k as i64, generate_member(spec, instance, first_member + k)?.matrix().clone())?;
    }
    Ok(f)
}

fn fourier_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    let phi = &opts.phi;
    let spec = opts.corpus;
    let d = opts.degree;
    if d == 0 || d as i64 > crate::torus::MAX_DEGREE {
        return Err(invalid(format!("degree must be in 1..={}", crate::torus::MAX_DEGREE)));
    }
    let samples = default_samples(d);
    let mut asm = Assembly::new(opts, Some(spec));
    asm.options.insert("degree".into(), json!(d));
    asm.options.insert("samples".into(), json!(samples));
    let idx = phi.indices();
    if !idx.is_reflexive_range() {
        asm.warn(format!("indices ({}, {}) outside 1 < a ≤ b < ∞ required by the coefficient bound", idx.lower, idx.upper));
    } else if idx.lower <= 2.0 {
        asm.warn(format!("lower index {} ≤ 2: lacunary square-function ratio is outside its hypothesis", idx.lower));
    }
    let bands = lacunary_bands_up_to(d);
    let inner = Exec::Sequential;
    let outcomes = opts.exec.try_map_range(spec.instances, |i| -> Result<Outcome> {
        let family: Vec<OperatorTrigPolynomial> = (0..FOURIER_FAMILY)
            .map(|m| analytic_polynomial(&spec, i, m * (d + 1), d))
            .collect::<Result<_>>()?;
        let f = &family[0];
        let inputs: Vec<TracialMatrix> = family
            .iter()
            .flat_map(|g| (0..=d as i64).map(|k| fourier_coefficient(g, k)))
            .collect();
        let mut o = Outcome::new(i, &inputs.iter().collect::<Vec<_>>());

        let mut dft_err: f64 = 0.0;
        for n in -(d as i64) - 1..=d as i64 + 1 {
            dft_err = dft_err.max(fourier_coefficient(f, n).matrix().max_abs_diff(fourier_coefficient_dft(f, n).matrix()));
        }
        o.check("dft_recovery", 1e-12, dft_err);
        let coeff_l2: f64 = f.coefficients().values().map(|a| f.weight() * a.frobenius_sq()).sum();
        let sample_l2: f64 = (0..samples).map(|j| f.weight() * f.sample(j, samples).frobenius_sq()).sum::<f64>() / samples as f64;
        o.check("parseval", 1e-10, relative(coeff_l2, sample_l2));
        for &n in &bands {
            let dn = delta_multiplier(f, n);
            o.check("delta_idempotent", 0.0, if delta_multiplier(&dn, n) == dn { 0.0 } else { 1.0 });
            for &m in bands.iter().filter(|&&m| m != n) {
                o.check("delta_orthogonal", 0.0, delta_multiplier(&dn, m).coefficients().len() as f64);
            }
            o.check("delta_support", 0.0, dn.coefficients().keys().filter(|k| !lacunary_band(n).contains(k)).count() as f64);
        }

        let rhs = phi_moment(&torus_spectrum(f, Some(samples), inner)?, phi).value;
        if rhs == 0.0 {
            return Ok(o.skip());
        }
        let coef = (0..=d as i64)
            .map(|n| Ok(phi_moment(&singular_spectrum(&fourier_coefficient(f, n))?, phi).value))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        o.ratio("coef_ratio", coef / rhs);

        let fam_rhs = phi_moment(&torus_column_square_spectrum(&family, samples, inner)?, phi).value;
        let mut fam_lhs: f64 = 0.0;
        for n in 0..=d as i64 {
            let coeffs: Vec<TracialMatrix> = family.iter().map(|g| fourier_coefficient(g, n)).collect();
            fam_lhs = fam_lhs.max(phi_moment(&column_square_spectrum(&coeffs)?, phi).value);
        }
        o.ratio("coef_square_ratio", fam_lhs / fam_rhs);

        let deltas: Vec<OperatorTrigPolynomial> = bands.iter().map(|&n| delta_multiplier(f, n)).collect();
        let lac = phi_moment(&torus_column_square_spectrum(&deltas, samples, inner)?, phi).value;
        o.ratio("lacunary_ratio", lac / rhs);
        Ok(o)
    })?;
    Ok(asm.finish(outcomes))
}

// ---------------------------------------------------------------- indices

fn indices_suite(opts: &SuiteOptions) -> Result<VerificationReport> {
    let phi = &opts.phi;
    let mut asm = Assembly::new(opts, None);
    let est = phi.indices_estimate(
        crate::orlicz::DEFAULT_GRID_MIN,
        crate::orlicz::DEFAULT_GRID_MAX,
        crate::orlicz::DEFAULT_GRID_POINTS,
    )?;
    asm.options.insert("grid".into(), serde_json::to_value(est.grid).expect("grid serializes"));
    let reported = phi.indices();
    let mut o = Outcome {
        record: InstanceRecord {
            index: 0,
            input_hash: String::new(),
            ratios: BTreeMap::new(),
            skipped: false,
        },
        checks: CheckSet::default(),
    };
    o.ratio("lower", reported.lower);
    o.ratio("upper", reported.upper);
    o.ratio("lower_estimate", est.lower);
    o.ratio("upper_estimate", est.upper);
    let delta2 = phi.delta2_check();
    o.ratio("delta2_witness", delta2.witness);
    o.check("delta2", 0.0, if delta2.holds { 0.0 } else { 1.0 });
    if let Some(closed) = phi.indices_closed_form() {
        o.check("estimate_lower", 0.05, (est.lower - closed.lower).abs() / closed.lower);
        o.check("estimate_upper", 0.005, (est.upper - closed.upper).abs() / closed.upper);
    } else {
        asm.warnings.push("no closed-form indices for this family; grid estimate reported".into());
    }
    o.check("ordered", 0.0, reported.lower - reported.upper);
    Ok(asm.finish(vec![o]))
}
