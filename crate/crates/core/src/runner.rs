//! Config-driven verification runs and their JSON reports.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::analysis::{
    classify_form, douglas_report, flatness_report, DouglasVerdict, FlatVerdict, Vanishing,
};
use crate::error::{GeomError, Result};
use crate::fields::{
    fixture, norms, sample_points, sample_x, EvaluationPoint, Expr, FieldSet, MetricField,
    OneFormField, SampleSpec,
};
use crate::jets::{eval_y_jet, fd_check};
use crate::linalg;
use crate::metric::Quantity;
use crate::psi::{admissibility, GridSpec, KernelFamily, PsiKernel};
use crate::spray::{
    deviation_system, ell_deviation_identity, ell_residual, point_contractions, solve_ell_system,
    spray_closed, spray_oracle, spray_via_solver,
};
use crate::tensors::{cartan_closed, fundamental_closed, published_inverse, scalar_state};

/// Where the metric and the two forms come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    Fixture(String),
    Inline(InlineFields),
}

/// Fields written as expressions in `x1..xn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineFields {
    /// Rows of `a_ij`; Euclidean when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<String>>>,
    pub beta: Vec<String>,
    pub gamma: Vec<String>,
    /// Declared bounds on the alpha-norms of the two forms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
}

/// Kernel family and parameters; the rectangle defaults per family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub family: KernelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
}

impl KernelConfig {
    pub fn kernel(&self) -> PsiKernel {
        let (b, g) = self.family.default_bounds();
        PsiKernel::with_bounds(self.family.clone(), self.b0.unwrap_or(b), self.g0.unwrap_or(g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// closed-form tensor vs jet oracle, relative
    pub tensor: f64,
    pub determinant: f64,
    pub inverse: f64,
    pub cartan: f64,
    /// `C_ijk y^k`
    pub cartan_euler: f64,
    pub finite_difference: f64,
    pub solver: f64,
    pub spray: f64,
    pub deviation_identity: f64,
    pub homogeneity: f64,
    pub bij: f64,
    pub projective: f64,
    /// residuals at or below this are zero
    pub zero: f64,
    /// residuals above this are structurally nonzero
    pub nonzero: f64,
    /// form classification threshold
    pub classify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tensor: 1e-9,
            determinant: 1e-8,
            inverse: 1e-8,
            cartan: 1e-8,
            cartan_euler: 1e-9,
            finite_difference: 1e-6,
            solver: 1e-9,
            spray: 1e-7,
            deviation_identity: 1e-8,
            homogeneity: 1e-9,
            bij: 1e-8,
            projective: 1e-6,
            zero: 1e-6,
            nonzero: 1e-3,
            classify: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommandOptions {
    pub expect_flat: bool,
    pub expect_douglas: bool,
    /// include full arrays in the report
    pub full: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub fields: FieldSource,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub sample: SampleSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub options: CommandOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Admissibility,
    Tensors,
    Spray,
    Hamel,
    Douglas,
    VerifyAll,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Admissibility,
        Command::Tensors,
        Command::Spray,
        Command::Hamel,
        Command::Douglas,
        Command::VerifyAll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Admissibility => "admissibility",
            Command::Tensors => "tensors",
            Command::Spray => "spray",
            Command::Hamel => "hamel",
            Command::Douglas => "douglas",
            Command::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| GeomError::InvalidConfig(vec![format!("unknown command `{s}`")]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Inconclusive,
    /// recorded for inspection, never fails
    Info,
    /// the point could not be evaluated
    Skipped,
}

/// Norm, largest entry and leading entries of an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Digest {
    pub norm: f64,
    pub max_abs: f64,
    pub head: Vec<f64>,
}

impl Digest {
    pub fn of(values: &[f64]) -> Digest {
        Digest {
            norm: linalg::norm(values),
            max_abs: linalg::max_abs(values.iter().copied()),
            head: values.iter().take(4).copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// index into the sample list; absent for run-level checks
    pub point: Option<usize>,
    pub closed: Option<Digest>,
    pub oracle: Option<Digest>,
    /// absent for categorical checks
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub verdict: CheckVerdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub full: Option<serde_json::Value>,
}

impl CheckRecord {
    fn new(name: &str, point: Option<usize>, residual: f64, verdict: CheckVerdict) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            point,
            closed: None,
            oracle: None,
            residual: residual.is_finite().then_some(residual),
            tolerance: None,
            verdict,
            detail: None,
            full: None,
        }
    }

    /// Pass iff `residual <= tol`.
    fn bounded(name: &str, point: Option<usize>, residual: f64, tol: f64) -> CheckRecord {
        // NaN fails
        let verdict = if residual <= tol {
            CheckVerdict::Pass
        } else {
            CheckVerdict::Fail
        };
        CheckRecord {
            tolerance: Some(tol),
            ..CheckRecord::new(name, point, residual, verdict)
        }
    }

    fn info(name: &str, point: Option<usize>, residual: f64) -> CheckRecord {
        CheckRecord::new(name, point, residual, CheckVerdict::Info)
    }

    fn compare(mut self, closed: &[f64], oracle: &[f64]) -> CheckRecord {
        self.closed = Some(Digest::of(closed));
        self.oracle = Some(Digest::of(oracle));
        self
    }

    fn detail(mut self, d: impl Into<String>) -> CheckRecord {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks_run: usize,
    pub failures: usize,
    pub inconclusive: usize,
    pub skipped: usize,
    pub max_residual: f64,
}

/// Run-level outcomes, present for the commands that produce them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub admissible: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub flat: Option<FlatVerdict>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub douglas: Option<DouglasVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub command: Command,
    pub config_digest: String,
    pub config: RunConfig,
    pub points: Vec<EvaluationPoint>,
    pub verdicts: Verdicts,
    pub summary: Summary,
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.failures == 0 {
            0
        } else {
            1
        }
    }
}

/// Everything a run needs, resolved and validated.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub fields: FieldSet,
    pub kernel: PsiKernel,
    pub xs: Vec<Vec<f64>>,
    pub points: Vec<EvaluationPoint>,
}

fn json_error(e: serde_json::Error) -> GeomError {
    GeomError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// A kernel object such as `{"family": "exp_gamma", "b0": 0.4}`.
pub fn parse_kernel(text: &str) -> Result<PsiKernel> {
    let cfg: KernelConfig = serde_json::from_str(text).map_err(json_error)?;
    Ok(cfg.kernel())
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(json_error)
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    cfg.prepare()?;
    Ok(cfg)
}

pub fn config_to_string(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// SHA-256 of the compact JSON form, in hex.
pub fn config_digest(cfg: &RunConfig) -> String {
    let bytes = Sha256::digest(serde_json::to_string(cfg).expect("config serializes"));
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn report_to_string(report: &VerificationReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn emit_report(report: &VerificationReport, path: &Path) -> Result<()> {
    let mut text = report_to_string(report);
    text.push('\n');
    std::fs::write(path, text).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))
}

pub fn load_report(path: &Path) -> Result<VerificationReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(json_error)
}

fn parse_exprs(items: &[String], n: usize, what: &str, problems: &mut Vec<String>) -> Vec<Expr> {
    if items.len() != n {
        problems.push(format!("{what}: expected {n} entries, got {}", items.len()));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, src)| {
            Expr::parse(src, n).unwrap_or_else(|e| {
                problems.push(format!("{what}[{i}]: {e}"));
                Expr::zero(n)
            })
        })
        .collect()
}

fn inline_fields(f: &InlineFields, n: usize, problems: &mut Vec<String>) -> Option<FieldSet> {
    let before = problems.len();
    let metric = match &f.metric {
        None => Some(MetricField::euclidean(n)),
        Some(rows) => {
            if rows.len() != n {
                problems.push(format!("fields.inline.metric: expected {n} rows, got {}", rows.len()));
            }
            let entries: Vec<Vec<Expr>> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| parse_exprs(r, n, &format!("fields.inline.metric[{i}]"), problems))
                .collect();
            match MetricField::new(entries) {
                Ok(m) => Some(m),
                Err(e) => {
                    problems.push(format!("fields.inline.metric: {e}"));
                    None
                }
            }
        }
    };
    let beta = parse_exprs(&f.beta, n, "fields.inline.beta", problems);
    let gamma = parse_exprs(&f.gamma, n, "fields.inline.gamma", problems);
    if problems.len() > before {
        return None;
    }
    let mut fs = FieldSet::new(metric?, OneFormField::new(beta), OneFormField::new(gamma)).ok()?;
    fs.bounds = f.bounds;
    Some(fs)
}

impl RunConfig {
    /// Minimal config for a fixture and kernel, defaults elsewhere.
    pub fn for_fixture(name: &str, dimension: usize, kernel: KernelFamily) -> RunConfig {
        RunConfig {
            dimension,
            fields: FieldSource::Fixture(name.to_string()),
            kernel: KernelConfig {
                family: kernel,
                b0: None,
                g0: None,
            },
            sample: SampleSpec::default(),
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            options: CommandOptions::default(),
        }
    }

    /// Builds the fields and sample set, collecting every problem found.
    pub fn prepare(&self) -> Result<Prepared> {
        let n = self.dimension;
        let mut problems = Vec::new();
        if !(2..=4).contains(&n) {
            return Err(GeomError::InvalidConfig(vec![format!(
                "dimension: must be 2, 3 or 4, got {n}"
            )]));
        }
        let kernel = self.kernel.kernel();
        for (name, v) in [("kernel.b0", kernel.b0), ("kernel.g0", kernel.g0)] {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{name}: must be positive, got {v}"));
            }
        }
        if self.sample.points == 0 {
            problems.push("sample.points: must be at least 1".into());
        }
        let tol = serde_json::to_value(&self.tolerances).expect("tolerances serialize");
        if let Some(map) = tol.as_object() {
            for (k, v) in map {
                if !v.as_f64().is_some_and(|t| t > 0.0) {
                    problems.push(format!("tolerances.{k}: must be positive"));
                }
            }
        }
        let fields = match &self.fields {
            FieldSource::Fixture(name) => match fixture(name, n) {
                Ok(f) => Some(f),
                Err(e) => {
                    problems.push(format!("fields.fixture: {e}"));
                    None
                }
            },
            FieldSource::Inline(f) => inline_fields(f, n, &mut problems),
        };
        if !problems.is_empty() {
            return Err(GeomError::InvalidConfig(problems));
        }
        let fields = fields.expect("fields resolved without problems");
        let xs = sample_x(n, self.sample.points, self.sample.seed);
        if let Err(GeomError::InvalidConfig(mut p)) = fields.check_bounds(&xs) {
            problems.append(&mut p);
        }
        for x in &xs {
            if let Ok(nm) = norms(&fields.metric, &fields.beta, &fields.gamma, x) {
                if nm.b2.sqrt() >= kernel.b0 {
                    problems.push(format!(
                        "kernel.b0: beta norm {:.6} at x = {x:?} is not below b0 = {}",
                        nm.b2.sqrt(),
                        kernel.b0
                    ));
                }
                if nm.g2.sqrt() >= kernel.g0 {
                    problems.push(format!(
                        "kernel.g0: gamma norm {:.6} at x = {x:?} is not below g0 = {}",
                        nm.g2.sqrt(),
                        kernel.g0
                    ));
                }
            }
        }
        if let Err(e) = kernel.check_positive(17) {
            problems.push(format!("kernel: {e}"));
        }
        if !problems.is_empty() {
            return Err(GeomError::InvalidConfig(problems));
        }
        Ok(Prepared {
            points: sample_points(n, &self.sample),
            fields,
            kernel,
            xs,
        })
    }
}

fn skipped(name: &str, i: usize, e: &GeomError) -> CheckRecord {
    CheckRecord::new(name, Some(i), f64::NAN, CheckVerdict::Skipped).detail(e.to_string())
}

fn tensor_checks(pr: &Prepared, tol: &Tolerances, full: bool, i: usize, p: &EvaluationPoint) -> Result<Vec<CheckRecord>> {
    let (fs, k) = (&pr.fields, &pr.kernel);
    let n = p.dim();
    let st = scalar_state(fs, k, p)?;
    let ft = fundamental_closed(&st)?;
    let jet = eval_y_jet(&Quantity::HalfFSq(k.clone()), fs, p, 3)?;
    let og = jet.d2.expect("order three includes two");
    let oc: Vec<f64> = linalg::flatten3(&jet.d3.expect("order three")).iter().map(|v| 0.5 * v).collect();
    let cc = cartan_closed(&st)?;
    let (g_c, g_o) = (linalg::flatten2(&ft.g), linalg::flatten2(&og));
    let mut out = vec![
        CheckRecord::bounded("fundamental_tensor", Some(i), linalg::max_rel_err(&g_c, &g_o), tol.tensor)
            .compare(&g_c, &g_o),
        CheckRecord::bounded("determinant", Some(i), linalg::rel_err(ft.det, linalg::det(&og)), tol.determinant)
            .compare(&[ft.det], &[linalg::det(&og)]),
    ];
    let id = linalg::mat_mul(&ft.g, &ft.ginv);
    let id_err = linalg::max_abs(
        linalg::flatten2(&id)
            .iter()
            .zip(linalg::flatten2(&linalg::identity(n)))
            .map(|(a, b)| a - b),
    );
    out.push(CheckRecord::bounded("inverse_identity", Some(i), id_err, tol.inverse));
    let numeric = linalg::inverse(&og)?;
    let (gi_c, gi_o) = (linalg::flatten2(&ft.ginv), linalg::flatten2(&numeric));
    out.push(
        CheckRecord::bounded("inverse", Some(i), linalg::max_rel_err(&gi_c, &gi_o), tol.inverse)
            .compare(&gi_c, &gi_o),
    );
    let published = linalg::flatten2(&published_inverse(&st)?);
    out.push(
        CheckRecord::info("inverse_without_mixed_block", Some(i), linalg::max_rel_err(&published, &gi_o))
            .detail("gap of the inverse formula lacking the b^i gamma^j block"),
    );
    let c_c = linalg::flatten3(&cc);
    out.push(
        CheckRecord::bounded("cartan", Some(i), linalg::max_rel_err(&c_c, &oc), tol.cartan).compare(&c_c, &oc),
    );
    out.push(CheckRecord::bounded("cartan_symmetry", Some(i), linalg::asymmetry3(&cc), tol.cartan_euler));
    let mut euler: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let v: f64 = (0..n).map(|c| cc[a][b][c] * p.y[c]).sum();
            euler = euler.max(v.abs());
        }
    }
    out.push(CheckRecord::bounded("cartan_euler", Some(i), euler, tol.cartan_euler));
    let mut exps = vec![0u8; n];
    exps[0] = 2;
    let fd = fd_check(&Quantity::HalfFSq(k.clone()), fs, p, &exps)?;
    out.push(
        CheckRecord::bounded("fundamental_tensor_fd", Some(i), linalg::rel_err(ft.g[0][0], fd.value), tol.finite_difference)
            .compare(&[ft.g[0][0]], &[fd.value]),
    );
    if full {
        out[0].full = serde_json::to_value((&ft.g, &og)).ok();
        let pos = out.iter().position(|r| r.name == "cartan").expect("cartan record");
        out[pos].full = serde_json::to_value(&cc).ok();
    }
    Ok(out)
}

fn spray_checks(pr: &Prepared, tol: &Tolerances, full: bool, i: usize, p: &EvaluationPoint) -> Result<Vec<CheckRecord>> {
    let (fs, k) = (&pr.fields, &pr.kernel);
    let sol = spray_closed(fs, k, p)?;
    let oracle = spray_oracle(fs, k, p)?;
    let via = spray_via_solver(fs, k, p)?;
    let st = scalar_state(fs, k, p)?;
    let c = point_contractions(fs, p)?;
    let sys = deviation_system(&st, &c);
    let d = solve_ell_system(&sys, &st)?;
    let (l, r) = ell_deviation_identity(&st, &c, &sol.d);
    let twice = spray_closed(fs, k, &p.scaled(2.0))?;
    let scaled: Vec<f64> = sol.g.iter().map(|v| 4.0 * v).collect();
    let mut spray = CheckRecord::bounded("spray", Some(i), linalg::max_rel_err(&sol.g, &oracle), tol.spray)
        .compare(&sol.g, &oracle);
    if full {
        spray.full = serde_json::to_value(&sol).ok();
    }
    Ok(vec![
        spray,
        CheckRecord::bounded("spray_solver_route", Some(i), linalg::max_rel_err(&via, &oracle), tol.spray)
            .compare(&via, &oracle),
        CheckRecord::bounded("solver_residual", Some(i), ell_residual(&sys, &st, &d), tol.solver),
        CheckRecord::bounded("deviation_identity", Some(i), linalg::rel_err(l, r), tol.deviation_identity)
            .compare(&[l], &[r]),
        CheckRecord::bounded("spray_homogeneity", Some(i), linalg::max_rel_err(&twice.g, &scaled), tol.homogeneity),
    ])
}

struct PointOutcome {
    records: Vec<CheckRecord>,
    vanishing: Option<Vanishing>,
}

fn hamel_checks(pr: &Prepared, tol: &Tolerances, i: usize, p: &EvaluationPoint) -> Result<PointOutcome> {
    let r = flatness_report(&pr.fields, &pr.kernel, p)?;
    let hv = Vanishing::with(r.hamel_norm, tol.zero, tol.nonzero);
    let cv = Vanishing::with(r.condition_norm, tol.zero, tol.nonzero);
    let mut records = vec![
        CheckRecord::info("hamel", Some(i), r.hamel_norm)
            .compare(&r.hamel, &[])
            .detail(format!("{hv:?}").to_lowercase()),
        CheckRecord::info("condition51", Some(i), r.condition_norm)
            .compare(&r.condition51, &[])
            .detail(format!("{cv:?}").to_lowercase()),
    ];
    let agree = match (hv, cv) {
        (Vanishing::Inconclusive, _) | (_, Vanishing::Inconclusive) => CheckVerdict::Inconclusive,
        (a, b) if a == b => CheckVerdict::Pass,
        _ => CheckVerdict::Fail,
    };
    records.push(
        CheckRecord::new("flatness_equivalence", Some(i), f64::NAN, agree)
            .detail(format!("hamel {hv:?}, condition {cv:?}").to_lowercase()),
    );
    if hv == Vanishing::Zero {
        records.push(
            CheckRecord::bounded("projective_factor", Some(i), r.projective_gap, tol.projective)
                .detail(format!("P = {}", r.projective_factor)),
        );
    }
    Ok(PointOutcome {
        records,
        vanishing: Some(hv),
    })
}

fn douglas_checks(pr: &Prepared, tol: &Tolerances, full: bool, i: usize, p: &EvaluationPoint) -> Result<PointOutcome> {
    let r = douglas_report(&pr.fields, &pr.kernel, p, full)?;
    let dv = Vanishing::with(r.douglas_norm, tol.zero, tol.nonzero);
    let mut tensor = CheckRecord::info("douglas_tensor", Some(i), r.douglas_norm)
        .detail(format!("{dv:?}").to_lowercase());
    if let Some(t) = &r.tensor {
        tensor.full = serde_json::to_value(t).ok();
    }
    let b = linalg::flatten2(&r.bij);
    let mut records = vec![
        tensor,
        CheckRecord::bounded("bij_antisymmetry", Some(i), r.bij_asymmetry, tol.bij),
        CheckRecord::bounded("bij_reconstruction", Some(i), r.bij_reconstruction_gap, tol.bij).compare(&b, &[]),
    ];
    if dv == Vanishing::Zero {
        records.push(CheckRecord::bounded("bij_cubic", Some(i), r.bij_fourth, tol.zero));
    } else {
        records.push(CheckRecord::info("bij_cubic", Some(i), r.bij_fourth));
    }
    Ok(PointOutcome {
        records,
        vanishing: Some(dv),
    })
}

fn per_point<F>(pr: &Prepared, name: &str, f: F) -> (Vec<CheckRecord>, Vec<Vanishing>)
where
    F: Fn(usize, &EvaluationPoint) -> Result<PointOutcome> + Sync,
{
    let outs: Vec<PointOutcome> = pr
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            f(i, p).unwrap_or_else(|e| PointOutcome {
                records: vec![skipped(name, i, &e)],
                vanishing: None,
            })
        })
        .collect();
    let mut records = Vec::new();
    let mut vs = Vec::new();
    for o in outs {
        records.extend(o.records);
        vs.extend(o.vanishing);
    }
    (records, vs)
}

fn plain<F>(f: F) -> impl Fn(usize, &EvaluationPoint) -> Result<PointOutcome> + Sync
where
    F: Fn(usize, &EvaluationPoint) -> Result<Vec<CheckRecord>> + Sync,
{
    move |i, p| {
        f(i, p).map(|records| PointOutcome {
            records,
            vanishing: None,
        })
    }
}

/// Whether the flat-alpha criterion applies: exponential kernel, constant `a`.
fn criterion_applies(pr: &Prepared) -> bool {
    matches!(pr.kernel.family, KernelFamily::ExpGamma) && pr.fields.metric.is_constant()
}

fn criterion_record(name: &str, pr: &Prepared, tol: &Tolerances, observed: Vanishing) -> Result<Vec<CheckRecord>> {
    let fs = &pr.fields;
    let beta = classify_form(&fs.metric, &fs.beta, &pr.xs, tol.classify)?;
    let gamma = classify_form(&fs.metric, &fs.gamma, &pr.xs, tol.classify)?;
    let predicted = beta.parallel && gamma.closed;
    let detail = format!(
        "beta parallel = {}, gamma closed = {}, predicted {}",
        beta.parallel,
        gamma.closed,
        if predicted { "zero" } else { "nonzero" }
    );
    let verdict = if !criterion_applies(pr) {
        CheckVerdict::Info
    } else {
        match observed {
            Vanishing::Inconclusive => CheckVerdict::Inconclusive,
            Vanishing::Zero if predicted => CheckVerdict::Pass,
            Vanishing::Nonzero if !predicted => CheckVerdict::Pass,
            _ => CheckVerdict::Fail,
        }
    };
    Ok(vec![
        CheckRecord::info("classify_beta", None, beta.max_nabla)
            .detail(format!("closed = {}, parallel = {}", beta.closed, beta.parallel)),
        CheckRecord::info("classify_gamma", None, gamma.max_nabla)
            .detail(format!("closed = {}, parallel = {}", gamma.closed, gamma.parallel)),
        CheckRecord::new(name, None, f64::NAN, verdict).detail(detail),
    ])
}

/// Executes one command over the prepared sample set.
pub fn run(cfg: &RunConfig, command: Command) -> Result<VerificationReport> {
    let pr = cfg.prepare()?;
    let tol = &cfg.tolerances;
    let full = cfg.options.full;
    let mut records = Vec::new();
    let mut verdicts = Verdicts::default();
    let wants = |c: Command| command == c || command == Command::VerifyAll;

    if wants(Command::Admissibility) {
        let rep = admissibility(&pr.kernel, &cfg.grid, cfg.dimension)?;
        verdicts.admissible = Some(rep.admissible);
        let mut r = CheckRecord::new(
            "admissibility",
            None,
            rep.violations as f64,
            if rep.admissible { CheckVerdict::Pass } else { CheckVerdict::Fail },
        )
        .detail(format!(
            "{} nodes, min Pi = {}, min Gamma = {}",
            rep.nodes, rep.min_pi, rep.min_gamma
        ));
        if let Some(w) = &rep.witness {
            r.full = serde_json::to_value(w).ok();
        }
        records.push(r);
        records.push(
            CheckRecord::info("kernel_positive", None, if rep.kernel_positive { 0.0 } else { 1.0 })
                .detail(rep.kernel_positive.to_string()),
        );
    }
    if wants(Command::Tensors) {
        records.extend(per_point(&pr, "tensors", plain(|i, p| tensor_checks(&pr, tol, full, i, p))).0);
    }
    if wants(Command::Spray) {
        records.extend(per_point(&pr, "spray", plain(|i, p| spray_checks(&pr, tol, full, i, p))).0);
    }
    if wants(Command::Hamel) {
        let (recs, vs) = per_point(&pr, "hamel", |i, p| hamel_checks(&pr, tol, i, p));
        records.extend(recs);
        let combined = Vanishing::combine(vs);
        let flat: FlatVerdict = combined.into();
        verdicts.flat = Some(flat);
        records.extend(criterion_record("projective_flatness_criterion", &pr, tol, combined)?);
        if cfg.options.expect_flat {
            let ok = flat == FlatVerdict::Flat;
            records.push(
                CheckRecord::new("expect_flat", None, f64::NAN, if ok { CheckVerdict::Pass } else { CheckVerdict::Fail })
                    .detail(format!("{flat:?}").to_lowercase()),
            );
        }
    }
    if wants(Command::Douglas) {
        let (recs, vs) = per_point(&pr, "douglas", |i, p| douglas_checks(&pr, tol, full, i, p));
        records.extend(recs);
        let combined = Vanishing::combine(vs);
        let dv: DouglasVerdict = combined.into();
        verdicts.douglas = Some(dv);
        records.extend(criterion_record("douglas_criterion", &pr, tol, combined)?);
        if cfg.options.expect_douglas {
            let ok = dv == DouglasVerdict::Douglas;
            records.push(
                CheckRecord::new("expect_douglas", None, f64::NAN, if ok { CheckVerdict::Pass } else { CheckVerdict::Fail })
                    .detail(format!("{dv:?}").to_lowercase()),
            );
        }
    }
    records.sort_by(|a, b| {
        let key = |r: &CheckRecord| r.point.unwrap_or(usize::MAX);
        key(a).cmp(&key(b)).then_with(|| a.name.cmp(&b.name))
    });
    let count = |v: CheckVerdict| records.iter().filter(|r| r.verdict == v).count();
    let summary = Summary {
        checks_run: records.len(),
        failures: count(CheckVerdict::Fail),
        inconclusive: count(CheckVerdict::Inconclusive),
        skipped: count(CheckVerdict::Skipped),
        max_residual: records
            .iter()
            .filter(|r| r.tolerance.is_some())
            .filter_map(|r| r.residual)
            .fold(0.0, f64::max),
    };
    Ok(VerificationReport {
        command,
        config_digest: config_digest(cfg),
        config: cfg.clone(),
        points: pr.points,
        verdicts,
        summary,
        records,
    })
}
