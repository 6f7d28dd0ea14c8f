//! Run configuration, command dispatch and report emission.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, ToleranceProfile};
use crate::orthospectrum::{
    basmajian_partial_sums, cross_ratio_period, double_check, gap_experiment, theorem_a_from_report,
    theorem_b_from_report, DoubleReport, GapReport, Metric, SpectrumReport, TheoremAReport, TheoremBReport,
};
use crate::siegel::{symplectic_residual, SymplecticElement};
use crate::surface::{
    build_pair_of_pants_fuchsian, corollary_width, diagonal_embed, product_of_fuchsians, translation_lengths,
    FreeWord, Representation, SurfaceSpec, TranslationLengths,
};

pub const TOOL_NAME: &str = "siegel";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Absolute residual a configured matrix must meet.
pub const CONFIG_MATRIX_TOL: f64 = 1e-9;

pub const DEFAULT_DEPTH: usize = 6;

/// Machine-readable category of a configuration problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCode {
    Syntax,
    UnknownKey,
    MissingKey,
    WrongType,
    Arity,
    InvalidValue,
    NonOrthogonalTwist,
    NonSymplectic,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::Syntax => "syntax",
            IssueCode::UnknownKey => "unknown_key",
            IssueCode::MissingKey => "missing_key",
            IssueCode::WrongType => "wrong_type",
            IssueCode::Arity => "arity",
            IssueCode::InvalidValue => "invalid_value",
            IssueCode::NonOrthogonalTwist => "non_orthogonal_twist",
            IssueCode::NonSymplectic => "non_symplectic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub code: IssueCode,
    /// Location inside the document, `$` for the root.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.code.as_str(), self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    PairOfPants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(format!("unknown format {s:?}, expected json or csv")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: Option<String>,
    pub format: OutputFormat,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            path: None,
            format: OutputFormat::Json,
        }
    }
}

/// Builder parameters by representation kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepresentationSpec {
    Fuchsian {
        cuffs: [f64; 3],
    },
    Diagonal {
        cuffs: [f64; 3],
    },
    /// One orthogonal `n x n` twist per generator; `None` is the identity.
    TwistedDiagonal {
        cuffs: [f64; 3],
        twists: Vec<Option<Vec<Vec<f64>>>>,
    },
    Product {
        factors: Vec<[f64; 3]>,
    },
    Explicit {
        generators: Vec<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapParams {
    pub big_l: f64,
    pub eta: f64,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub surface: SurfaceKind,
    pub representation: Option<RepresentationSpec>,
    pub gap: Option<GapParams>,
    pub depth: usize,
    /// Boundary index; all boundaries when absent.
    pub boundary: Option<usize>,
    /// Extra words for `lengths` and `width`.
    pub words: Vec<FreeWord>,
    pub tolerances: ToleranceProfile,
    pub output: OutputSpec,
}

/// Parses `gamma0`, `gamma1`, `gamma2` or a bare index.
pub fn parse_boundary(s: &str) -> std::result::Result<usize, String> {
    let digits = s.strip_prefix("gamma").unwrap_or(s);
    match digits.parse::<usize>() {
        Ok(i) if i < 3 => Ok(i),
        _ => Err(format!("unknown boundary {s:?}, expected gamma0, gamma1 or gamma2")),
    }
}

struct Checker {
    issues: Vec<ConfigIssue>,
}

impl Checker {
    fn push(&mut self, code: IssueCode, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            code,
            path: path.into(),
            message: message.into(),
        });
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Some(obj) = v.as_object() else {
            self.push(IssueCode::WrongType, path, "expected an object");
            return None;
        };
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.push(IssueCode::UnknownKey, format!("{path}.{k}"), format!("unknown key {k:?}"));
            }
        }
        Some(obj)
    }

    fn required<'a>(&mut self, obj: &'a Map<String, Value>, key: &str, path: &str) -> Option<&'a Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.push(IssueCode::MissingKey, format!("{path}.{key}"), format!("missing key {key:?}"));
        }
        v
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.push(IssueCode::WrongType, path, "expected a finite number");
                None
            }
        }
    }

    fn positive(&mut self, v: &Value, path: &str) -> Option<f64> {
        let x = self.number(v, path)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.push(IssueCode::InvalidValue, path, format!("expected a positive number, got {x}"));
            None
        }
    }

    fn count(&mut self, v: &Value, path: &str) -> Option<usize> {
        match v.as_u64() {
            Some(x) => Some(x as usize),
            None => {
                self.push(IssueCode::WrongType, path, "expected a non-negative integer");
                None
            }
        }
    }

    fn array<'a>(&mut self, v: &'a Value, path: &str, len: Option<usize>) -> Option<&'a Vec<Value>> {
        let Some(a) = v.as_array() else {
            self.push(IssueCode::WrongType, path, "expected an array");
            return None;
        };
        if let Some(l) = len {
            if a.len() != l {
                self.push(IssueCode::Arity, path, format!("expected {l} entries, found {}", a.len()));
                return None;
            }
        }
        Some(a)
    }

    fn cuffs(&mut self, v: &Value, path: &str) -> Option<[f64; 3]> {
        let a = self.array(v, path, Some(3))?;
        let vals: Vec<Option<f64>> = a
            .iter()
            .enumerate()
            .map(|(i, x)| self.positive(x, &format!("{path}[{i}]")))
            .collect();
        let vals: Option<Vec<f64>> = vals.into_iter().collect();
        vals.map(|v| [v[0], v[1], v[2]])
    }

    fn matrix(&mut self, v: &Value, path: &str, size: usize) -> Option<Vec<Vec<f64>>> {
        let rows = self.array(v, path, Some(size))?;
        let mut out = Vec::with_capacity(size);
        let mut ok = true;
        for (r, row) in rows.iter().enumerate() {
            let rp = format!("{path}[{r}]");
            let Some(cols) = self.array(row, &rp, Some(size)) else {
                ok = false;
                continue;
            };
            let mut line = Vec::with_capacity(size);
            for (c, x) in cols.iter().enumerate() {
                match self.number(x, &format!("{rp}[{c}]")) {
                    Some(x) => line.push(x),
                    None => ok = false,
                }
            }
            out.push(line);
        }
        ok.then_some(out)
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> RealMatrix {
    RealMatrix::from_rows(rows).expect("validated square rows")
}

const TOP_KEYS: &[&str] = &["n", "surface", "representation", "gap", "depth", "boundary", "words", "tolerances", "output"];
const TOL_KEYS: &[&str] = &["residual_abs", "compare_rel", "pd_margin", "condition_cap"];

/// Parses and validates a configuration document, collecting every problem.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        Error::Config(vec![ConfigIssue {
            code: IssueCode::Syntax,
            path: "$".into(),
            message: e.to_string(),
        }])
    })?;
    let mut ck = Checker { issues: Vec::new() };
    let cfg = check_config(&value, &mut ck);
    match cfg {
        Some(c) if ck.issues.is_empty() => Ok(c),
        _ => Err(Error::Config(ck.issues)),
    }
}

fn check_config(v: &Value, ck: &mut Checker) -> Option<RunConfig> {
    let obj = ck.object(v, "$", TOP_KEYS)?;
    let n = ck.required(obj, "n", "$").and_then(|x| ck.count(x, "$.n"));
    if n == Some(0) {
        ck.push(IssueCode::InvalidValue, "$.n", "rank must be at least 1");
    }
    let surface = match obj.get("surface") {
        None => Some(SurfaceKind::PairOfPants),
        Some(Value::String(s)) if s == "pair_of_pants" => Some(SurfaceKind::PairOfPants),
        Some(_) => {
            ck.push(IssueCode::InvalidValue, "$.surface", "only \"pair_of_pants\" is supported");
            None
        }
    };
    let representation = match (obj.get("representation"), n) {
        (Some(r), Some(n)) if n > 0 => check_representation(r, n, ck).map(Some),
        (Some(_), _) => None,
        (None, _) => Some(None),
    };
    let gap = match obj.get("gap") {
        None => Some(None),
        Some(g) => {
            let o = ck.object(g, "$.gap", &["big_l", "eta"])?;
            let big_l = ck.required(o, "big_l", "$.gap").and_then(|x| ck.positive(x, "$.gap.big_l"));
            let eta = ck.required(o, "eta", "$.gap").and_then(|x| ck.positive(x, "$.gap.eta"));
            match (big_l, eta) {
                (Some(big_l), Some(eta)) => Some(Some(GapParams { big_l, eta })),
                _ => None,
            }
        }
    };
    if representation == Some(None) && gap == Some(None) {
        ck.push(IssueCode::MissingKey, "$.representation", "missing key \"representation\"");
    }
    let depth = match obj.get("depth") {
        None => Some(DEFAULT_DEPTH),
        Some(d) => ck.count(d, "$.depth"),
    };
    let boundary = match obj.get("boundary") {
        None => Some(None),
        Some(Value::String(s)) => match parse_boundary(s) {
            Ok(b) => Some(Some(b)),
            Err(m) => {
                ck.push(IssueCode::InvalidValue, "$.boundary", m);
                None
            }
        },
        Some(_) => {
            ck.push(IssueCode::WrongType, "$.boundary", "expected a string");
            None
        }
    };
    let words = match obj.get("words") {
        None => Some(Vec::new()),
        Some(w) => {
            let a = ck.array(w, "$.words", None)?;
            let mut out = Vec::new();
            for (i, x) in a.iter().enumerate() {
                let p = format!("$.words[{i}]");
                match x.as_str().map(FreeWord::from_str) {
                    Some(Ok(w)) if !w.is_empty() => out.push(w),
                    Some(_) => ck.push(IssueCode::InvalidValue, p, "expected a nonempty word in a, A, b, B"),
                    None => ck.push(IssueCode::WrongType, p, "expected a string"),
                }
            }
            Some(out)
        }
    };
    let tolerances = match obj.get("tolerances") {
        None => Some(ToleranceProfile::default()),
        Some(t) => {
            let o = ck.object(t, "$.tolerances", TOL_KEYS)?;
            let mut tol = ToleranceProfile::default();
            for (k, x) in o {
                let p = format!("$.tolerances.{k}");
                let Some(x) = ck.positive(x, &p) else { continue };
                match k.as_str() {
                    "residual_abs" => tol.residual_abs = x,
                    "compare_rel" => tol.compare_rel = x,
                    "pd_margin" => tol.pd_margin = x,
                    "condition_cap" => tol.condition_cap = x,
                    _ => {}
                }
            }
            match tol.validate() {
                Ok(()) => Some(tol),
                Err(m) => {
                    ck.push(IssueCode::InvalidValue, "$.tolerances", m);
                    None
                }
            }
        }
    };
    let output = match obj.get("output") {
        None => Some(OutputSpec::default()),
        Some(o) => {
            let m = ck.object(o, "$.output", &["path", "format"])?;
            let path = match m.get("path") {
                None => Some(None),
                Some(Value::String(s)) => Some(Some(s.clone())),
                Some(_) => {
                    ck.push(IssueCode::WrongType, "$.output.path", "expected a string");
                    None
                }
            };
            let format = match m.get("format") {
                None => Some(OutputFormat::Json),
                Some(Value::String(s)) => match s.parse() {
                    Ok(f) => Some(f),
                    Err(e) => {
                        ck.push(IssueCode::InvalidValue, "$.output.format", e);
                        None
                    }
                },
                Some(_) => {
                    ck.push(IssueCode::WrongType, "$.output.format", "expected a string");
                    None
                }
            };
            Some(OutputSpec {
                path: path?,
                format: format?,
            })
        }
    };
    Some(RunConfig {
        n: n?,
        surface: surface?,
        representation: representation?,
        gap: gap?,
        depth: depth?,
        boundary: boundary?,
        words: words?,
        tolerances: tolerances?,
        output: output?,
    })
}

fn check_representation(v: &Value, n: usize, ck: &mut Checker) -> Option<RepresentationSpec> {
    let p = "$.representation";
    let Some(kind) = v.get("kind") else {
        ck.object(v, p, &["kind"]);
        ck.push(IssueCode::MissingKey, format!("{p}.kind"), "missing key \"kind\"");
        return None;
    };
    let kind = match kind.as_str() {
        Some(k) => k,
        None => {
            ck.push(IssueCode::WrongType, format!("{p}.kind"), "expected a string");
            return None;
        }
    };
    let cuffs = |ck: &mut Checker, o: &Map<String, Value>| {
        ck.required(o, "cuffs", p)
            .and_then(|c| ck.cuffs(c, &format!("{p}.cuffs")))
    };
    match kind {
        "fuchsian" => {
            let o = ck.object(v, p, &["kind", "cuffs"])?;
            if n != 1 {
                ck.push(IssueCode::InvalidValue, "$.n", format!("a fuchsian representation has rank 1, got n = {n}"));
            }
            Some(RepresentationSpec::Fuchsian { cuffs: cuffs(ck, o)? })
        }
        "diagonal" => {
            let o = ck.object(v, p, &["kind", "cuffs"])?;
            Some(RepresentationSpec::Diagonal { cuffs: cuffs(ck, o)? })
        }
        "twisted_diagonal" => {
            let o = ck.object(v, p, &["kind", "cuffs", "twists"])?;
            let c = cuffs(ck, o);
            let tp = format!("{p}.twists");
            let raw = ck.required(o, "twists", p).and_then(|t| ck.array(t, &tp, Some(2)));
            let mut twists = Vec::new();
            let mut ok = raw.is_some();
            for (i, t) in raw.into_iter().flatten().enumerate() {
                let ip = format!("{tp}[{i}]");
                if t.is_null() {
                    twists.push(None);
                    continue;
                }
                let Some(m) = ck.matrix(t, &ip, n) else {
                    ok = false;
                    continue;
                };
                let x = to_matrix(&m);
                let res = (&x.transpose() * &x).dist(&RealMatrix::identity(n));
                if res >= CONFIG_MATRIX_TOL {
                    ck.push(
                        IssueCode::NonOrthogonalTwist,
                        ip,
                        format!("twist is not orthogonal (residual {res:.3e})"),
                    );
                    ok = false;
                }
                twists.push(Some(m));
            }
            ok.then_some(())?;
            Some(RepresentationSpec::TwistedDiagonal { cuffs: c?, twists })
        }
        "product" => {
            let o = ck.object(v, p, &["kind", "factors"])?;
            let fp = format!("{p}.factors");
            let raw = ck.required(o, "factors", p).and_then(|f| ck.array(f, &fp, Some(n)))?;
            let factors: Vec<Option<[f64; 3]>> = raw
                .iter()
                .enumerate()
                .map(|(i, f)| ck.cuffs(f, &format!("{fp}[{i}]")))
                .collect();
            Some(RepresentationSpec::Product {
                factors: factors.into_iter().collect::<Option<_>>()?,
            })
        }
        "explicit" => {
            let o = ck.object(v, p, &["kind", "generators"])?;
            let gp = format!("{p}.generators");
            let raw = ck.required(o, "generators", p).and_then(|g| ck.array(g, &gp, Some(2)))?;
            let mut gens = Vec::new();
            let mut ok = true;
            for (i, g) in raw.iter().enumerate() {
                let ip = format!("{gp}[{i}]");
                let Some(m) = ck.matrix(g, &ip, 2 * n) else {
                    ok = false;
                    continue;
                };
                let res = symplectic_residual(&to_matrix(&m));
                if res >= CONFIG_MATRIX_TOL {
                    ck.push(
                        IssueCode::NonSymplectic,
                        ip,
                        format!("generator is not symplectic (residual {res:.3e})"),
                    );
                    ok = false;
                }
                gens.push(m);
            }
            ok.then_some(())?;
            Some(RepresentationSpec::Explicit { generators: gens })
        }
        other => {
            ck.push(
                IssueCode::InvalidValue,
                format!("{p}.kind"),
                format!("unknown kind {other:?}, expected fuchsian, diagonal, twisted_diagonal, product or explicit"),
            );
            None
        }
    }
}

/// Builds the configured representation and checks it is maximal.
pub fn build_representation(cfg: &RunConfig) -> Result<Representation> {
    let tol = &cfg.tolerances;
    let spec = cfg
        .representation
        .as_ref()
        .ok_or_else(|| Error::Domain("the configuration has no representation".into()))?;
    let rho = match spec {
        RepresentationSpec::Fuchsian { cuffs } => build_pair_of_pants_fuchsian(*cuffs, tol)?,
        RepresentationSpec::Diagonal { cuffs } => {
            diagonal_embed(&build_pair_of_pants_fuchsian(*cuffs, tol)?, cfg.n, None, tol)?
        }
        RepresentationSpec::TwistedDiagonal { cuffs, twists } => {
            let tw: Vec<RealMatrix> = twists
                .iter()
                .map(|t| t.as_deref().map(to_matrix).unwrap_or_else(|| RealMatrix::identity(cfg.n)))
                .collect();
            diagonal_embed(&build_pair_of_pants_fuchsian(*cuffs, tol)?, cfg.n, Some(&tw), tol)?
        }
        RepresentationSpec::Product { factors } => {
            let fs = factors
                .iter()
                .map(|c| build_pair_of_pants_fuchsian(*c, tol))
                .collect::<Result<Vec<_>>>()?;
            product_of_fuchsians(&fs, tol)?
        }
        RepresentationSpec::Explicit { generators } => {
            let images = generators
                .iter()
                .map(|g| SymplecticElement::new(to_matrix(g), tol))
                .collect::<Result<Vec<_>>>()?;
            Representation::new(images, SurfaceSpec::pair_of_pants(), *tol)?
        }
    };
    rho.require_maximal()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Lengths,
    Orthospectrum,
    VerifyA1,
    VerifyA2,
    VerifyB,
    DoubleCheck,
    Gap,
    Width,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Lengths,
        Command::Orthospectrum,
        Command::VerifyA1,
        Command::VerifyA2,
        Command::VerifyB,
        Command::DoubleCheck,
        Command::Gap,
        Command::Width,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Lengths => "lengths",
            Command::Orthospectrum => "orthospectrum",
            Command::VerifyA1 => "verify-a1",
            Command::VerifyA2 => "verify-a2",
            Command::VerifyB => "verify-b",
            Command::DoubleCheck => "double-check",
            Command::Gap => "gap",
            Command::Width => "width",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

/// One pass/fail check. `margin` is the slack, negative on failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub margin: Option<f64>,
}

impl Check {
    fn slack(name: impl Into<String>, margin: f64) -> Self {
        Self {
            name: name.into(),
            passed: margin >= 0.0,
            margin: Some(margin),
        }
    }

    fn flag(name: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            passed,
            margin: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Verdict {
    fn from_checks(checks: Vec<Check>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordLengths {
    pub word: FreeWord,
    pub lengths: TranslationLengths,
    /// `log |det R(gamma-, y, gamma y, gamma+)|`, peripheral words only.
    pub ell_b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthEntry {
    pub word: FreeWord,
    pub ell_r: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportBody {
    Lengths(Vec<WordLengths>),
    Orthospectrum,
    TheoremA(Vec<TheoremAReport>),
    TheoremB(Vec<TheoremBReport>),
    Double(Vec<DoubleReport>),
    Gap(GapReport),
    Width(Vec<WidthEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

/// Everything a command produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    /// Resolved tolerances, echoed for reproducibility.
    pub tolerances: ToleranceProfile,
    pub verdict: Verdict,
    pub spectra: Vec<SpectrumReport>,
    pub body: ReportBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<Timing>>,
}

impl ReportDocument {
    pub fn new(command: Command, config: RunConfig, body: ReportBody) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command,
            tolerances: config.tolerances,
            config,
            verdict: Verdict {
                passed: true,
                checks: Vec::new(),
            },
            spectra: Vec::new(),
            body,
            timings: None,
        }
    }

    /// Process exit status: 0 pass, 2 failed verdict.
    pub fn exit_status(&self) -> i32 {
        if self.verdict.passed {
            0
        } else {
            2
        }
    }
}

/// Runs a command. Timings are recorded only when asked, so that repeated
/// runs emit identical bytes.
pub fn run_command(cmd: Command, cfg: &RunConfig, timings: bool) -> Result<ReportDocument> {
    let start = Instant::now();
    let mut doc = dispatch(cmd, cfg)?;
    if timings {
        doc.timings = Some(vec![Timing {
            stage: "total".into(),
            seconds: start.elapsed().as_secs_f64(),
        }]);
    }
    Ok(doc)
}

fn boundaries(cfg: &RunConfig) -> Vec<usize> {
    match cfg.boundary {
        Some(b) => vec![b],
        None => (0..3).collect(),
    }
}

fn spectrum(rho: &Representation, b: usize, depth: usize) -> Result<SpectrumReport> {
    basmajian_partial_sums(rho, b, depth).map_err(|e| {
        e.context(format!(
            "boundary gamma{b} ({}) at depth {depth}",
            rho.spec().peripheral(b)
        ))
    })
}

fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<ReportDocument> {
    let tol = &cfg.tolerances;
    let depth = cfg.depth;
    if cmd == Command::Gap {
        let p = cfg
            .gap
            .ok_or_else(|| Error::Domain("the gap command needs a \"gap\" block with big_l and eta".into()))?;
        let g = gap_experiment(cfg.n, p.big_l, p.eta, depth, tol)
            .map_err(|e| e.context(format!("gap experiment at depth {depth}")))?;
        let rhs = g.finsler_rhs.max(g.riemannian_rhs);
        let lengths = (g.ell_f - g.expected_ell_f).abs().max((g.ell_r - g.expected_ell_r).abs());
        let designed = g
            .designed
            .iter()
            .map(|d| (d.two_logcoth - d.expected).abs())
            .fold(0.0, f64::max);
        let checks = vec![
            Check::slack("lengths", 1e-6 - lengths),
            Check::slack("designed_orthogeodesics", 1e-7 - designed),
            Check::slack("sums_below_eta", g.eta - rhs),
        ];
        let mut doc = ReportDocument::new(cmd, cfg.clone(), ReportBody::Gap(g));
        doc.verdict = Verdict::from_checks(checks);
        return Ok(doc);
    }
    let rho = build_representation(cfg)?;
    let bs = boundaries(cfg);
    let peripheral_words: Vec<FreeWord> = bs.iter().map(|&b| rho.spec().peripheral(b).clone()).collect();
    let extra_lengths = |words: &[FreeWord]| -> Result<Vec<(FreeWord, TranslationLengths)>> {
        words
            .iter()
            .map(|w| {
                translation_lengths(&rho.evaluate_word(w), tol)
                    .map(|l| (w.clone(), l))
                    .map_err(|e| e.context(format!("word {w}")))
            })
            .collect()
    };
    let mut checks = Vec::new();
    let mut spectra = Vec::new();
    let body = match cmd {
        Command::Lengths => {
            let mut out = Vec::new();
            for &b in &bs {
                out.push(WordLengths {
                    word: rho.spec().peripheral(b).clone(),
                    lengths: rho.peripheral_lengths(b),
                    ell_b: Some(cross_ratio_period(&rho, b)?),
                });
            }
            for (word, lengths) in extra_lengths(&cfg.words)? {
                out.push(WordLengths {
                    word,
                    lengths,
                    ell_b: None,
                });
            }
            ReportBody::Lengths(out)
        }
        Command::Width => {
            let mut out = Vec::new();
            for (w, &b) in peripheral_words.iter().zip(&bs) {
                let ell_r = rho.peripheral_lengths(b).riemannian;
                out.push(WidthEntry {
                    word: w.clone(),
                    ell_r,
                    width: corollary_width(ell_r, cfg.n)?,
                });
            }
            for (word, l) in extra_lengths(&cfg.words)? {
                out.push(WidthEntry {
                    word,
                    ell_r: l.riemannian,
                    width: corollary_width(l.riemannian, cfg.n)?,
                });
            }
            ReportBody::Width(out)
        }
        Command::Orthospectrum => {
            for &b in &bs {
                let s = spectrum(&rho, b, depth)?;
                let slack = tol.compare_rel * s.ell_f.max(1.0);
                checks.push(Check::slack(format!("sum_bound gamma{b}"), s.ell_f + slack - s.sums.identity));
                spectra.push(s);
            }
            ReportBody::Orthospectrum
        }
        Command::VerifyA1 | Command::VerifyA2 => {
            let metric = if cmd == Command::VerifyA1 {
                Metric::Finsler
            } else {
                Metric::Riemannian
            };
            let mut out = Vec::new();
            for &b in &bs {
                let s = spectrum(&rho, b, depth)?;
                let a = theorem_a_from_report(&s, metric, tol);
                let slack = tol.compare_rel * a.ell.max(1.0);
                let worst_depth = s
                    .sums_by_depth
                    .iter()
                    .map(|d| match metric {
                        Metric::Finsler => d.sums.lower,
                        Metric::Riemannian => d.sums.riemannian_lower,
                    })
                    .fold(0.0, f64::max);
                checks.push(Check::slack(format!("lower_bound gamma{b}"), a.ell + slack - worst_depth));
                checks.push(Check::slack(format!("term_chain gamma{b}"), a.min_chain_margin + tol.compare_rel));
                out.push(a);
                spectra.push(s);
            }
            ReportBody::TheoremA(out)
        }
        Command::VerifyB => {
            let mut out = Vec::new();
            for &b in &bs {
                let s = spectrum(&rho, b, depth)?;
                let r = theorem_b_from_report(&rho, &s)?;
                checks.push(Check::slack(
                    format!("period gamma{b}"),
                    1e-8 * r.two_ell_f.max(1.0) - r.period_defect,
                ));
                checks.push(Check::slack(format!("term_identity gamma{b}"), 1e-8 - r.max_term_defect));
                checks.push(Check::flag(format!("sum_bounded gamma{b}"), r.sum_bounded));
                out.push(r);
                spectra.push(s);
            }
            ReportBody::TheoremB(out)
        }
        Command::DoubleCheck => {
            let mut out = Vec::new();
            for &b in &bs {
                let d = double_check(&rho, b, depth, 10)
                    .map_err(|e| e.context(format!("double of gamma{b} at depth {depth}")))?;
                checks.push(Check::slack(format!("relations gamma{b}"), 1e-7 - d.max_relation_residual));
                checks.push(Check::slack(format!("doubled_lengths gamma{b}"), 1e-7 - d.max_defect));
                checks.push(Check::flag(
                    format!("tube_endpoints gamma{b}"),
                    d.entries.iter().all(|e| e.tube_matches),
                ));
                out.push(d);
            }
            ReportBody::Double(out)
        }
        Command::Gap => unreachable!("handled above"),
    };
    let mut doc = ReportDocument::new(cmd, cfg.clone(), body);
    doc.verdict = Verdict::from_checks(checks);
    doc.spectra = spectra;
    Ok(doc)
}

/// Serializes a document in the requested format.
pub fn emit_report(doc: &ReportDocument, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(doc)
                .map_err(|e| Error::Numerical(format!("report serialization failed: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => Ok(emit_csv(doc)),
    }
}

pub fn parse_report(text: &str) -> Result<ReportDocument> {
    serde_json::from_str(text).map_err(|e| Error::Domain(format!("malformed report: {e}")))
}

/// CSV header for rank `n`.
pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["delta_word", "theta_plus", "theta_minus", "ell_F", "ell_R"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    cols.extend((1..=n).map(|i| format!("ell_vect_{i}")));
    cols.extend(["dF_term", "lower_term", "upper_term"].map(String::from));
    cols.join(",")
}

fn emit_csv(doc: &ReportDocument) -> String {
    let n = doc.spectra.first().map_or(doc.config.n, |s| s.n);
    let mut out = csv_header(n);
    out.push('\n');
    for r in doc.spectra.iter().flat_map(|s| &s.records) {
        let mut cells = vec![
            r.delta_word.to_string(),
            r.theta_plus.to_string(),
            r.theta_minus.to_string(),
            r.ell_f.to_string(),
            r.ell_r.to_string(),
        ];
        cells.extend(r.ell_vect.components().iter().map(|v| v.to_string()));
        cells.extend([r.df_term, r.lower_term, r.upper_term].map(|v| v.to_string()));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAGONAL: &str = r#"{"n": 2, "representation": {"kind": "diagonal", "cuffs": [2, 2, 2]}, "depth": 2}"#;

    fn codes(text: &str) -> Vec<(IssueCode, String)> {
        match parse_config(text) {
            Err(Error::Config(issues)) => issues.into_iter().map(|i| (i.code, i.path)).collect(),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_diagonal_is_valid() {
        let cfg = parse_config(DIAGONAL).unwrap();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.depth, 2);
        assert_eq!(cfg.tolerances, ToleranceProfile::default());
        assert_eq!(cfg.representation, Some(RepresentationSpec::Diagonal { cuffs: [2.0; 3] }));
    }

    #[test]
    fn product_arity() {
        let c = codes(r#"{"n": 2, "representation": {"kind": "product", "factors": [[2,2,2],[2,2,2],[2,2,2]]}}"#);
        assert_eq!(c, vec![(IssueCode::Arity, "$.representation.factors".to_string())]);
    }

    #[test]
    fn explicit_non_symplectic() {
        let c = codes(
            r#"{"n": 1, "representation": {"kind": "explicit", "generators": [[[2,0],[0,1]], [[1,0],[0,1]]]}}"#,
        );
        assert_eq!(c, vec![(IssueCode::NonSymplectic, "$.representation.generators[0]".to_string())]);
    }

    #[test]
    fn twist_not_orthogonal() {
        let c = codes(
            r#"{"n": 2, "representation": {"kind": "twisted_diagonal", "cuffs": [2,2,2],
                "twists": [[[1, 0.1], [0, 1]], null]}}"#,
        );
        assert_eq!(c, vec![(IssueCode::NonOrthogonalTwist, "$.representation.twists[0]".to_string())]);
    }

    #[test]
    fn unknown_keys_are_all_reported() {
        let c = codes(r#"{"n": 1, "colour": 3, "representation": {"kind": "fuchsian", "cuffs": [2,2,2], "x": 1}}"#);
        assert!(c.contains(&(IssueCode::UnknownKey, "$.colour".to_string())));
        assert!(c.contains(&(IssueCode::UnknownKey, "$.representation.x".to_string())));
    }

    #[test]
    fn syntax_and_type_errors() {
        assert_eq!(codes("{"), vec![(IssueCode::Syntax, "$".to_string())]);
        let c = codes(r#"{"n": "two", "representation": {"kind": "diagonal", "cuffs": [2, -1, 2]}}"#);
        assert!(c.contains(&(IssueCode::WrongType, "$.n".to_string())));
        let c = codes(r#"{"n": 2, "representation": {"kind": "diagonal", "cuffs": [2, -1, 2]}}"#);
        assert_eq!(c, vec![(IssueCode::InvalidValue, "$.representation.cuffs[1]".to_string())]);
    }

    #[test]
    fn lengths_on_diagonal() {
        let cfg = parse_config(DIAGONAL).unwrap();
        let doc = run_command(Command::Lengths, &cfg, false).unwrap();
        let ReportBody::Lengths(ls) = &doc.body else { panic!() };
        assert!((ls[0].lengths.finsler - 2.0).abs() < 1e-9);
        assert!((ls[0].ell_b.unwrap() - 4.0).abs() < 1e-8);
        assert_eq!(doc.exit_status(), 0);
    }

    #[test]
    fn width_on_diagonal() {
        let cfg = parse_config(DIAGONAL).unwrap();
        let doc = run_command(Command::Width, &cfg, false).unwrap();
        let ReportBody::Width(ws) = &doc.body else { panic!() };
        let expect = corollary_width(2.0 * 2f64.sqrt(), 2).unwrap();
        assert!((ws[0].width - expect).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let cfg = parse_config(DIAGONAL).unwrap();
        let doc = run_command(Command::VerifyA1, &cfg, false).unwrap();
        let a = emit_report(&doc, OutputFormat::Json).unwrap();
        assert_eq!(parse_report(&a).unwrap(), doc);
        let b = emit_report(&run_command(Command::VerifyA1, &cfg, false).unwrap(), OutputFormat::Json).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_rows() {
        let cfg = parse_config(DIAGONAL).unwrap();
        let doc = run_command(Command::Orthospectrum, &cfg, false).unwrap();
        let csv = emit_report(&doc, OutputFormat::Csv).unwrap();
        let records: usize = doc.spectra.iter().map(|s| s.records.len()).sum();
        assert_eq!(csv.lines().count(), records + 1);
        assert_eq!(
            csv.lines().next().unwrap(),
            "delta_word,theta_plus,theta_minus,ell_F,ell_R,ell_vect_1,ell_vect_2,dF_term,lower_term,upper_term"
        );
    }

    #[test]
    fn empty_records_document() {
        let cfg = parse_config(DIAGONAL).unwrap();
        let mut doc = run_command(Command::Orthospectrum, &cfg, false).unwrap();
        for s in &mut doc.spectra {
            s.records.clear();
            s.sums = Default::default();
        }
        let text = emit_report(&doc, OutputFormat::Json).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["spectra"][0]["records"], Value::Array(Vec::new()));
        assert_eq!(v["spectra"][0]["sums"]["identity"], 0.0);
        assert_eq!(parse_report(&text).unwrap(), doc);
    }

    #[test]
    fn boundary_names() {
        assert_eq!(parse_boundary("gamma2"), Ok(2));
        assert!(parse_boundary("gamma3").is_err());
        assert_eq!("verify-a2".parse::<Command>(), Ok(Command::VerifyA2));
        assert!("frobnicate".parse::<Command>().is_err());
    }
}
