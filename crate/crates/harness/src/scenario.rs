//! Scenario files: a flat TOML table with a `kind` and kind-specific keys.
//!
//! ```toml
//! kind = "graph_limit"
//! sigma = "1"
//! y0 = "x"
//! n_list = [16, 32, 64]
//! ```
//!
//! Expressions are plain strings. `sigma` is over `x, xp`, the Cucker–Smale
//! weight `a` over `r`, and `y0` over `x`; vector-valued `y0` separates its
//! components with `;`. Errors point at the offending line and column.

use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use mflab_core::ode::Scheme;
use mflab_core::pde::{parse_expr, parse_pde_on, Domain, EpsPolicy, Expr, PdeSpec, Variant};
use mflab_core::{Metric, TagRule};

use crate::error::{line_col, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    GraphLimit,
    Chaos,
    Consensus,
    Pde,
    W1Suite,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::GraphLimit => "graph_limit",
            Kind::Chaos => "chaos",
            Kind::Consensus => "consensus",
            Kind::Pde => "pde",
            Kind::W1Suite => "w1_suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KernelName {
    Opinion,
    CuckerSmale,
    MollifiedPde,
    GaussianPde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MetricName {
    Interval,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TagName {
    Left,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SchemeName {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ReferenceName {
    ClosedForm,
    Surrogate,
    #[serde(rename = "self")]
    SelfRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum EpsName {
    Fixed,
    Schedule,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    kind: Spanned<Kind>,
    name: Option<String>,
    seed: Option<u64>,
    output: Option<String>,

    kernel: Option<Spanned<KernelName>>,
    sigma: Option<Spanned<String>>,
    a: Option<Spanned<String>>,
    y0: Option<Spanned<String>>,
    metric: Option<MetricName>,
    tag_rule: Option<TagName>,
    scheme: Option<SchemeName>,

    n_list: Option<Spanned<Vec<usize>>>,
    t_end: Option<f64>,
    dt: Option<f64>,
    reference: Option<Spanned<ReferenceName>>,
    reference_m: Option<usize>,
    holder_y0: Option<f64>,
    samples: Option<usize>,
    slack: Option<f64>,

    marginal_order: Option<usize>,
    times: Option<Vec<f64>>,

    sites: Option<usize>,
    cloud: Option<usize>,
    k_max: Option<usize>,

    pde: Option<Spanned<String>>,
    domain: Option<Spanned<String>>,
    eps_policy: Option<Spanned<EpsName>>,
    eps_c: Option<f64>,
    eps: Option<f64>,

    instances: Option<usize>,
    w1_tolerance: Option<f64>,

    expect_slope: Option<[f64; 2]>,
    expect_r2_min: Option<f64>,
    expect_final_rel_max: Option<f64>,
    expect_monotone: Option<bool>,
    expect_temperature_rel_max: Option<f64>,
}

/// Hard assertions attached to a scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expect {
    pub slope: Option<(f64, f64)>,
    pub r2_min: Option<f64>,
    pub final_rel_max: Option<f64>,
    pub monotone: bool,
    pub temperature_rel_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Opinion { sigma: Expr },
    CuckerSmale { a: Expr },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphReference {
    /// `y(t, x) = m + (y0(x) − m) e^{−c t}`, valid for constant `σ ≡ c`.
    ClosedForm,
    Surrogate { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChaosReference {
    /// `μ_0 = μ^E_0`.
    SelfRef,
    /// `μ_0` on `m` midpoint tags.
    Surrogate { m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphLimitJob {
    pub kernel: KernelSpec,
    pub metric: Metric,
    pub y0: Vec<Expr>,
    pub n_list: Vec<usize>,
    pub t_end: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub tag_rule: TagRule,
    pub reference: GraphReference,
    pub holder_y0: f64,
    pub samples: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosJob {
    pub kernel: KernelSpec,
    pub metric: Metric,
    pub y0: Vec<Expr>,
    pub n_list: Vec<usize>,
    pub order: usize,
    pub times: Vec<f64>,
    pub dt: f64,
    pub scheme: Scheme,
    pub reference: ChaosReference,
    pub samples: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusJob {
    pub sigma: Expr,
    pub sites: usize,
    pub cloud: usize,
    pub t_end: f64,
    pub dt: f64,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeJob {
    pub spec: PdeSpec,
    pub variant: Variant,
    pub policy: EpsPolicy,
    pub n_list: Vec<usize>,
    pub y0: Expr,
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct W1Job {
    pub instances: usize,
    /// `N` values for the Lebesgue-vs-midpoint empirical check; may be empty.
    pub n_list: Vec<usize>,
    pub surrogate_m: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    GraphLimit(GraphLimitJob),
    Chaos(ChaosJob),
    Consensus(ConsensusJob),
    Pde(PdeJob),
    W1Suite(W1Job),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub expect: Expect,
    pub job: Job,
}

impl Scenario {
    pub fn kind(&self) -> Kind {
        match self.job {
            Job::GraphLimit(_) => Kind::GraphLimit,
            Job::Chaos(_) => Kind::Chaos,
            Job::Consensus(_) => Kind::Consensus,
            Job::Pde(_) => Kind::Pde,
            Job::W1Suite(_) => Kind::W1Suite,
        }
    }
}

pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse(&text, path, stem)
}

/// Parses scenario text; `file` is only used in error messages.
pub fn parse(text: &str, file: &Path, default_name: &str) -> Result<Scenario> {
    let ctx = Ctx { text, file };
    let raw: Raw = toml::from_str(text).map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start);
        ctx.at(offset, e.message().trim_end().to_string())
    })?;
    ctx.resolve(raw, default_name)
}

struct Ctx<'a> {
    text: &'a str,
    file: &'a Path,
}

impl Ctx<'_> {
    fn at(&self, offset: usize, message: impl Into<String>) -> Error {
        let (line, column) = line_col(self.text, offset);
        Error::Scenario { file: self.file.to_path_buf(), line, column, message: message.into() }
    }

    /// Byte offset of the first character inside a quoted string value.
    fn content_start(&self, span: &Range<usize>) -> usize {
        let lit = &self.text[span.start..span.end.min(self.text.len())];
        if lit.starts_with("\"\"\"") || lit.starts_with("'''") {
            span.start + 3
        } else {
            span.start + 1
        }
    }

    /// Maps a core parse error in `source` (which starts at byte `start`) to a file position.
    fn expr_error(&self, start: usize, source: &str, key: &str, err: mflab_core::Error) -> Error {
        match err {
            mflab_core::Error::Parse { column, message } => {
                let inner = source.char_indices().nth(column.saturating_sub(1)).map_or(source.len(), |(i, _)| i);
                self.at(start + inner, format!("in '{key}': {message}"))
            }
            other => self.at(start, format!("in '{key}': {other}")),
        }
    }

    fn expr(&self, value: &Spanned<String>, key: &str, vars: &[&str]) -> Result<Expr> {
        let start = self.content_start(&value.span());
        parse_expr(value.get_ref(), vars).map_err(|e| self.expr_error(start, value.get_ref(), key, e))
    }

    fn components(&self, value: &Spanned<String>, key: &str, vars: &[&str]) -> Result<Vec<Expr>> {
        let mut start = self.content_start(&value.span());
        let mut out = Vec::new();
        for part in value.get_ref().split(';') {
            out.push(parse_expr(part, vars).map_err(|e| self.expr_error(start, part, key, e))?);
            start += part.len() + 1;
        }
        Ok(out)
    }

    fn require<'v, T>(&self, v: &'v Option<T>, key: &str, kind: &Spanned<Kind>) -> Result<&'v T> {
        v.as_ref().ok_or_else(|| self.at(kind.span().start, format!("{} scenario needs '{key}'", kind.get_ref().as_str())))
    }

    fn n_list(&self, v: &Spanned<Vec<usize>>, min: usize) -> Result<Vec<usize>> {
        let list = v.get_ref();
        if list.is_empty() {
            return Err(self.at(v.span().start, "n_list is empty"));
        }
        if let Some(&bad) = list.iter().find(|&&n| n < min) {
            return Err(self.at(v.span().start, format!("n_list entries must be at least {min}, found {bad}")));
        }
        if list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(self.at(v.span().start, "n_list must be strictly ascending"));
        }
        Ok(list.clone())
    }

    fn particle_kernel(&self, raw: &Raw, dim: usize) -> Result<KernelSpec> {
        let name = raw.kernel.as_ref().map_or(KernelName::Opinion, |k| *k.get_ref());
        let pos = raw.kernel.as_ref().map_or(raw.kind.span().start, |k| k.span().start);
        match name {
            KernelName::Opinion => {
                let sigma = match &raw.sigma {
                    Some(s) => self.expr(s, "sigma", &["x", "xp"])?,
                    None => Expr::Num(1.0),
                };
                Ok(KernelSpec::Opinion { sigma })
            }
            KernelName::CuckerSmale => {
                if dim != 2 {
                    return Err(self.at(pos, format!("cucker_smale needs a two-component y0 (q; p), found {dim}")));
                }
                let a = match &raw.a {
                    Some(s) => self.expr(s, "a", &["r"])?,
                    None => return Err(self.at(pos, "cucker_smale needs the weight 'a' (an expression in r)")),
                };
                Ok(KernelSpec::CuckerSmale { a })
            }
            other => Err(self.at(pos, format!("kernel {other:?} is only valid in pde scenarios"))),
        }
    }

    fn positive(&self, v: Option<f64>, default: f64, key: &str, kind: &Spanned<Kind>) -> Result<f64> {
        let x = v.unwrap_or(default);
        if !(x > 0.0) || !x.is_finite() {
            return Err(self.at(kind.span().start, format!("'{key}' must be positive, got {x}")));
        }
        Ok(x)
    }

    fn resolve(&self, raw: Raw, default_name: &str) -> Result<Scenario> {
        let kind = &raw.kind;
        let metric = match raw.metric {
            Some(MetricName::Torus) => Metric::Torus,
            _ => Metric::Interval,
        };
        let scheme = match raw.scheme {
            Some(SchemeName::Euler) => Scheme::Euler,
            _ => Scheme::Rk4,
        };
        let tag_rule = match raw.tag_rule {
            Some(TagName::Left) => TagRule::Left,
            _ => TagRule::Midpoint,
        };
        let samples = raw.samples.unwrap_or(256);
        let slack = raw.slack.unwrap_or(1.05);
        let expect = Expect {
            slope: raw.expect_slope.map(|[a, b]| (a.min(b), a.max(b))),
            r2_min: raw.expect_r2_min,
            final_rel_max: raw.expect_final_rel_max,
            monotone: raw.expect_monotone.unwrap_or(false),
            temperature_rel_max: raw.expect_temperature_rel_max,
        };
        let job = match *kind.get_ref() {
            Kind::GraphLimit => {
                let y0 = self.components(self.require(&raw.y0, "y0", kind)?, "y0", &["x"])?;
                let kernel = self.particle_kernel(&raw, y0.len())?;
                let n_list = self.n_list(self.require(&raw.n_list, "n_list", kind)?, 1)?;
                let max_n = *n_list.last().unwrap_or(&1);
                let reference = match raw.reference.as_ref().map(|r| (*r.get_ref(), r.span().start)) {
                    Some((ReferenceName::ClosedForm, pos)) => {
                        let constant = matches!(&kernel, KernelSpec::Opinion { sigma } if !sigma.uses(0) && !sigma.uses(1));
                        if !constant || y0.len() != 1 {
                            return Err(self.at(pos, "closed_form needs the opinion kernel with constant sigma and scalar y0"));
                        }
                        GraphReference::ClosedForm
                    }
                    Some((ReferenceName::SelfRef, pos)) => {
                        return Err(self.at(pos, "graph_limit reference must be closed_form or surrogate"))
                    }
                    _ => GraphReference::Surrogate { m: raw.reference_m.unwrap_or(4 * max_n) },
                };
                Job::GraphLimit(GraphLimitJob {
                    kernel,
                    metric,
                    y0,
                    n_list,
                    t_end: self.positive(raw.t_end, 1.0, "t_end", kind)?,
                    dt: self.positive(raw.dt, 1e-3, "dt", kind)?,
                    scheme,
                    tag_rule,
                    reference,
                    holder_y0: raw.holder_y0.unwrap_or(1.0),
                    samples,
                    slack,
                })
            }
            Kind::Chaos => {
                let y0 = self.components(self.require(&raw.y0, "y0", kind)?, "y0", &["x"])?;
                let kernel = self.particle_kernel(&raw, y0.len())?;
                let n_list = self.n_list(self.require(&raw.n_list, "n_list", kind)?, 2)?;
                let order = raw.marginal_order.unwrap_or(2);
                if order < 1 || order > n_list[0] {
                    return Err(self.at(kind.span().start, format!("marginal_order must be in 1..={}", n_list[0])));
                }
                let reference = match raw.reference.as_ref().map(|r| (*r.get_ref(), r.span().start)) {
                    Some((ReferenceName::Surrogate, _)) => ChaosReference::Surrogate { m: raw.reference_m.unwrap_or(16) },
                    Some((ReferenceName::ClosedForm, pos)) => {
                        return Err(self.at(pos, "chaos reference must be self or surrogate"))
                    }
                    _ => ChaosReference::SelfRef,
                };
                let times = raw.times.clone().unwrap_or_else(|| vec![0.0, 1.0]);
                if times.iter().any(|t| !(*t >= 0.0)) {
                    return Err(self.at(kind.span().start, "times must be non-negative"));
                }
                Job::Chaos(ChaosJob {
                    kernel,
                    metric,
                    y0,
                    n_list,
                    order,
                    times,
                    dt: self.positive(raw.dt, 1e-3, "dt", kind)?,
                    scheme,
                    reference,
                    samples,
                    slack,
                })
            }
            Kind::Consensus => {
                let sigma = match &raw.sigma {
                    Some(s) => self.expr(s, "sigma", &["x", "xp"])?,
                    None => Expr::Num(1.0),
                };
                Job::Consensus(ConsensusJob {
                    sigma,
                    sites: raw.sites.unwrap_or(8),
                    cloud: raw.cloud.unwrap_or(16),
                    t_end: self.positive(raw.t_end, 1.0, "t_end", kind)?,
                    dt: self.positive(raw.dt, 1e-3, "dt", kind)?,
                    k_max: raw.k_max.unwrap_or(4),
                })
            }
            Kind::Pde => {
                let domain = match &raw.domain {
                    Some(d) => Domain::parse(d.get_ref()).map_err(|e| self.at(d.span().start, e.to_string()))?,
                    None => Domain::Torus,
                };
                let src = self.require(&raw.pde, "pde", kind)?;
                let start = self.content_start(&src.span());
                let spec = parse_pde_on(src.get_ref(), domain).map_err(|e| self.expr_error(start, src.get_ref(), "pde", e))?;
                let variant = match raw.kernel.as_ref().map(|k| (*k.get_ref(), k.span().start)) {
                    None | Some((KernelName::MollifiedPde, _)) => Variant::Polynomial,
                    Some((KernelName::GaussianPde, pos)) => {
                        if domain != Domain::Interval {
                            return Err(self.at(pos, "gaussian_pde needs domain = \"interval\""));
                        }
                        Variant::Gaussian
                    }
                    Some((_, pos)) => return Err(self.at(pos, "pde scenarios take kernel = mollified_pde or gaussian_pde")),
                };
                let policy = match raw.eps_policy.as_ref().map(|p| (*p.get_ref(), p.span().start)) {
                    Some((EpsName::Fixed, pos)) => {
                        EpsPolicy::Fixed(raw.eps.ok_or_else(|| self.at(pos, "eps_policy = \"fixed\" needs 'eps'"))?)
                    }
                    Some((EpsName::Schedule, pos)) => {
                        EpsPolicy::Schedule(raw.eps_c.ok_or_else(|| self.at(pos, "eps_policy = \"schedule\" needs 'eps_c'"))?)
                    }
                    None => match (raw.eps, raw.eps_c) {
                        (Some(e), None) => EpsPolicy::Fixed(e),
                        (None, Some(c)) => EpsPolicy::Schedule(c),
                        _ => return Err(self.at(kind.span().start, "pde scenario needs exactly one of 'eps' or 'eps_c'")),
                    },
                };
                let y0 = match &raw.y0 {
                    Some(s) => self.expr(s, "y0", &["x"])?,
                    None => parse_expr("sin(2*pi*x)", &["x"])?,
                };
                let min_n = if matches!(policy, EpsPolicy::Schedule(_)) { 3 } else { 1 };
                Job::Pde(PdeJob {
                    spec,
                    variant,
                    policy,
                    n_list: self.n_list(self.require(&raw.n_list, "n_list", kind)?, min_n)?,
                    y0,
                    t_end: self.positive(raw.t_end, 0.25, "t_end", kind)?,
                    dt: self.positive(raw.dt, 1e-3, "dt", kind)?,
                })
            }
            Kind::W1Suite => {
                let n_list = match &raw.n_list {
                    Some(v) => self.n_list(v, 1)?,
                    None => Vec::new(),
                };
                Job::W1Suite(W1Job {
                    instances: raw.instances.unwrap_or(200),
                    n_list,
                    surrogate_m: raw.reference_m.unwrap_or(4096),
                    tolerance: raw.w1_tolerance.unwrap_or(2e-4),
                })
            }
        };
        Ok(Scenario {
            name: raw.name.clone().unwrap_or_else(|| default_name.to_string()),
            seed: raw.seed.unwrap_or(0),
            output: raw.output.as_ref().map(PathBuf::from),
            expect,
            job,
        })
    }
}
