//! Symmetrized marginals of Dirac Liouville data, the `ε_n` combinatorics and
//! propagation-of-chaos certificates.
//!
//! For Dirac data `ρ = δ_X ⊗ δ_Ξ`, the `n`-th marginal of the symmetrization is
//! uniform over the `(N)_n = N!/(N−n)!` ordered tuples of distinct particles.
//! Writing `β_n` for the uniform measure over tuples with a repeated index,
//! `ρ^s_{N:n} = (1 + ε_n) (ρ^s_{N:1})^{⊗n} − ε_n β_n` with
//! `ε_n = N^n (N−n)!/N! − 1`.

use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::kernels::{kernel_constants, BoundBox, InteractionKernel, KernelConstants};
use crate::measures::{empirical, DiscreteMeasure};
use crate::ode::{Scheme, StepOptions};
use crate::partition::{PartitionField, TaggedPartition};
use crate::particles::{integrate_with, ParticleState, Trajectory};
use crate::wasserstein::{support_norm, w1, LP_ATOM_CAP};

/// Largest number of distinct tuples enumerated by [`symmetrized_marginal`].
pub const TUPLE_CAP: usize = LP_ATOM_CAP;

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `N^n (N−n)!/N! − 1`, from exact integers and a single division.
pub fn epsilon_n(big_n: usize, n: usize) -> Result<f64> {
    if n == 0 || n > big_n {
        return invalid(format!("need 1 <= n <= N, got n={n}, N={big_n}"));
    }
    let num = BigUint::from(big_n).pow(n as u32) * factorial(big_n - n);
    let den = factorial(big_n);
    let diff = num - &den;
    if diff.is_zero() {
        return Ok(0.0);
    }
    // keep both operands inside f64 range
    let shift = den.bits().saturating_sub(900);
    let (a, b) = ((diff >> shift).to_f64(), (den >> shift).to_f64());
    match (a, b) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => Ok(a / b),
        _ => invalid("ε_n is outside floating-point range"),
    }
}

/// `e^{n²/2N} − 1`.
pub fn epsilon_bound(big_n: usize, n: usize) -> f64 {
    (n as f64 * n as f64 / (2.0 * big_n as f64)).exp_m1()
}

/// `(N)_n`, or an error once it exceeds `cap`.
fn falling_factorial(big_n: usize, n: usize, cap: usize) -> Result<usize> {
    let mut count: usize = 1;
    for k in 0..n {
        count = count.saturating_mul(big_n - k);
        if count > cap {
            return Err(Error::CapExceeded(format!(
                "(N)_n = N!/(N-n)! exceeds {cap} for N={big_n}, n={n}"
            )));
        }
    }
    Ok(count)
}

/// Index tuples in lexicographic order: all `N^n` of them, or only distinct ones.
pub fn index_tuples(big_n: usize, n: usize, distinct_only: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(pos: usize, big_n: usize, distinct: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..big_n {
            if distinct && cur[..pos].contains(&i) {
                continue;
            }
            cur[pos] = i;
            rec(pos + 1, big_n, distinct, cur, out);
        }
    }
    rec(0, big_n, distinct_only, &mut cur, &mut out);
    out
}

fn tuple_measure(s: &ParticleState, tuples: &[Vec<usize>], weight: f64) -> Result<DiscreteMeasure> {
    let d = s.dim();
    let n = tuples.first().map_or(1, |t| t.len());
    let mut atoms = Vec::with_capacity(tuples.len() * n * (1 + d));
    for t in tuples {
        for &i in t {
            atoms.push(s.tags()[i]);
            atoms.extend_from_slice(s.state(i));
        }
    }
    let mut weights = vec![weight; tuples.len()];
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    DiscreteMeasure::new(n, d, atoms, weights)
}

/// `ρ^s_{N:n}` of the Dirac data `s` at a recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedMarginal {
    pub n: usize,
    pub big_n: usize,
    pub time: f64,
    pub measure: DiscreteMeasure,
}

impl SymmetrizedMarginal {
    pub fn from_state(s: &ParticleState, n: usize, time: f64) -> Result<Self> {
        Ok(Self { n, big_n: s.len(), time, measure: symmetrized_marginal(s, n)? })
    }
}

/// Equal weights `(N−n)!/N!` on every ordered tuple of distinct particles.
pub fn symmetrized_marginal(s: &ParticleState, n: usize) -> Result<DiscreteMeasure> {
    let big_n = s.len();
    if n == 0 || n > big_n {
        return invalid(format!("marginal order must be in 1..={big_n}, got {n}"));
    }
    let count = falling_factorial(big_n, n, TUPLE_CAP)?;
    tuple_measure(s, &index_tuples(big_n, n, true), 1.0 / count as f64)
}

/// Uniform measure over index tuples with at least one repeated index (`n ≥ 2`).
pub fn beta_n(s: &ParticleState, n: usize) -> Result<DiscreteMeasure> {
    let big_n = s.len();
    if n < 2 || n > big_n {
        return invalid(format!("β_n needs 2 <= n <= N, got n={n}, N={big_n}"));
    }
    let all = index_tuples(big_n, n, false);
    if all.len() > TUPLE_CAP * 8 {
        return Err(Error::CapExceeded(format!("N^n = {} tuples", all.len())));
    }
    let repeated: Vec<Vec<usize>> = all.into_iter().filter(|t| has_repeat(t)).collect();
    let w = 1.0 / repeated.len() as f64;
    tuple_measure(s, &repeated, w)
}

fn has_repeat(t: &[usize]) -> bool {
    (0..t.len()).any(|a| (a + 1..t.len()).any(|b| t[a] == t[b]))
}

/// Signed weights of `(1 + ε_n)(ρ^s_{N:1})^{⊗n} − ε_n β_n` on every index tuple.
pub fn decomposition_weights(big_n: usize, n: usize) -> Result<Vec<(Vec<usize>, f64)>> {
    if n < 2 || n > big_n {
        return invalid(format!("need 2 <= n <= N, got n={n}, N={big_n}"));
    }
    let eps = epsilon_n(big_n, n)?;
    let all = index_tuples(big_n, n, false);
    let total = all.len() as f64;
    let repeated = all.iter().filter(|t| has_repeat(t)).count() as f64;
    Ok(all
        .into_iter()
        .map(|t| {
            let mut w = (1.0 + eps) / total;
            if has_repeat(&t) {
                w -= eps / repeated;
            }
            (t, w)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// The bound failed, but only through sampled constants.
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosCertificate {
    pub big_n: usize,
    pub n: usize,
    pub t: f64,
    pub measured: f64,
    pub bound: f64,
    /// `2(e^{n²/2N} − 1) max(1, ‖supp μ(t)‖)`.
    pub combinatorial_term: f64,
    /// `n C(μ(t)) W1(μ^E_0, μ_0)`.
    pub transport_term: f64,
    /// Conservative `max_a (|x_a| + ‖ξ_a‖)` over the reference atoms.
    pub support_norm: f64,
    pub w1_initial: f64,
    pub constants: Option<KernelConstants>,
    pub c_mu: f64,
    pub estimated: bool,
    pub slack: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosParams {
    pub dt: f64,
    pub scheme: Scheme,
    pub samples: usize,
    pub seed: u64,
    pub slack: f64,
}

impl Default for ChaosParams {
    fn default() -> Self {
        Self { dt: 1e-3, scheme: Scheme::Rk4, samples: 256, seed: 0, slack: 1.05 }
    }
}

/// Certifies `W1(ρ(t)^s_{N:n}, μ(t)^{⊗n})` against
/// `2(e^{n²/2N} − 1) max(1, ‖supp μ(t)‖) + n C(μ(t)) W1(μ^E_0, μ_0)`,
/// where `μ` is represented by the particle state `reference0` pushed by the
/// same flow. `C(μ(t)) = exp(2t max(sup ‖G‖, Lip G))` with constants taken on
/// the bounding box of both trajectories.
pub fn chaos_certificate(
    k: &InteractionKernel,
    s0: &ParticleState,
    reference0: &ParticleState,
    n: usize,
    t: f64,
    params: ChaosParams,
) -> Result<ChaosCertificate> {
    let opts = StepOptions { scheme: params.scheme, ..StepOptions::default() };
    let traj = integrate_with(k, s0, t, params.dt, opts)?;
    let reference = integrate_with(k, reference0, t, params.dt, opts)?;
    let st = traj.final_state();
    let mu_t = empirical(&reference.final_state());
    let metric = k.metric();

    let rho = symmetrized_marginal(&st, n)?;
    let target = mu_t.tensor_power(n)?;
    let measured = w1(&rho, &target, metric)?;

    let big_n = s0.len();
    let supp = support_norm(&mu_t);
    let combinatorial_term = 2.0 * epsilon_bound(big_n, n) * supp.max(1.0);
    let w1_initial = w1(&empirical(s0), &empirical(reference0), metric)?;

    let (constants, c_mu, transport_term) = if w1_initial == 0.0 || t == 0.0 {
        (None, 1.0, n as f64 * w1_initial)
    } else {
        let bx = trajectory_box(&traj, s0.dim(), t)?.union(&trajectory_box(&reference, s0.dim(), t)?)?;
        let c = kernel_constants(k, &bx, params.samples, params.seed)?;
        let c_mu = (2.0 * t * c.sup.max(c.lipschitz)).exp();
        (Some(c), c_mu, n as f64 * c_mu * w1_initial)
    };
    let estimated = constants.is_some_and(|c| c.estimated);
    let bound = combinatorial_term + transport_term;
    let slack = if estimated { params.slack } else { 1.0 };
    let verdict = if measured <= bound * slack {
        Verdict::Pass
    } else if estimated {
        Verdict::Inconclusive
    } else {
        Verdict::Fail
    };
    Ok(ChaosCertificate {
        big_n,
        n,
        t,
        measured,
        bound,
        combinatorial_term,
        transport_term,
        support_norm: supp,
        w1_initial,
        constants,
        c_mu,
        estimated,
        slack,
        verdict,
    })
}

/// Bounding box of every recorded state of a trajectory.
pub fn trajectory_box(traj: &Trajectory, dim: usize, t: f64) -> Result<BoundBox> {
    let mut bx: Option<BoundBox> = None;
    for st in traj.states() {
        let b = BoundBox::hull(traj.tags(), st, dim, (0.0, t), 0.0)?;
        bx = Some(match bx {
            None => b,
            Some(prev) => prev.union(&b)?,
        });
    }
    bx.ok_or(Error::EmptyMeasure)
}

/// Columns `N, n, t, measured, bound, …, verdict`.
pub fn write_certificates_csv(certs: &[ChaosCertificate], path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        w,
        "N,n,t,measured,bound,combinatorial_term,transport_term,support_norm,support_norm_rule,w1_initial,sup_G,lip_G,C_mu,estimated,verdict"
    )?;
    for c in certs {
        let (sup, lip) = c.constants.map_or((f64::NAN, f64::NAN), |k| (k.sup, k.lipschitz));
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},conservative,{},{},{},{},{},{}",
            c.big_n,
            c.n,
            c.t,
            c.measured,
            c.bound,
            c.combinatorial_term,
            c.transport_term,
            c.support_norm,
            c.w1_initial,
            sup,
            lip,
            c.c_mu,
            c.estimated,
            c.verdict.as_str()
        )?;
    }
    w.flush()?;
    Ok(())
}

/// One time of a two-trajectory stability check.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub t: f64,
    pub w1: f64,
    pub w1_initial: f64,
    /// `exp(2t (sup ‖G‖ + L̂))` on the hull of both trajectories up to `t`.
    pub growth: f64,
    pub constants: KernelConstants,
}

impl StabilityRow {
    pub fn holds(&self, slack: f64) -> bool {
        self.w1 <= self.growth * self.w1_initial * slack
    }
}

/// `W1(μ^E(t), μ̃^E(t))` against `Ĉ(t) W1(μ^E(0), μ̃^E(0))` for each `t` in `times`.
pub fn vlasov_stability(
    k: &InteractionKernel,
    a0: &ParticleState,
    b0: &ParticleState,
    times: &[f64],
    params: ChaosParams,
) -> Result<Vec<StabilityRow>> {
    let metric = k.metric();
    let opts = StepOptions { scheme: params.scheme, ..StepOptions::default() };
    let w1_initial = w1(&empirical(a0), &empirical(b0), metric)?;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let ta = integrate_with(k, a0, t, params.dt, opts)?;
        let tb = integrate_with(k, b0, t, params.dt, opts)?;
        let d = w1(&empirical(&ta.final_state()), &empirical(&tb.final_state()), metric)?;
        let bx = trajectory_box(&ta, a0.dim(), t.max(params.dt))?.union(&trajectory_box(&tb, b0.dim(), t.max(params.dt))?)?;
        let c = kernel_constants(k, &bx, params.samples, params.seed)?;
        let growth = (2.0 * t * (c.sup + c.lipschitz)).exp();
        rows.push(StabilityRow { t, w1: d, w1_initial, growth, constants: c });
    }
    Ok(rows)
}

/// `ρ_1^N(t, x_i)`: the mean state of the particles sitting at each tag of `p`.
pub fn moment_measure_first(s: &ParticleState, p: &TaggedPartition) -> Result<PartitionField> {
    let d = s.dim();
    let mut sums = vec![0.0; p.len() * d];
    let mut counts = vec![0usize; p.len()];
    for (m, &site) in s.site_index().iter().enumerate() {
        if site >= p.len() || s.tags()[m].to_bits() != p.tags()[site].to_bits() {
            return invalid(format!("particle {m} does not sit on tag {site} of the partition"));
        }
        counts[site] += 1;
        for c in 0..d {
            sums[site * d + c] += s.state(m)[c];
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            return invalid(format!("site {i} has no particles"));
        }
        for v in &mut sums[i * d..(i + 1) * d] {
            *v /= c as f64;
        }
    }
    PartitionField::from_states(p.clone(), d, sums)
}
