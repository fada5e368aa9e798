//! The finite particle system `ξ̇_i = (1/M) Σ_j G(t, x_i, x_j, ξ_i, ξ_j)`.
//!
//! Tags are frozen parameters. The self-term `j = i` is part of the mean, and
//! the inner sum runs in ascending `j`, so the vector field is bit-identical
//! for every thread count.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::kernels::InteractionKernel;
use crate::ode::{integrate_fixed, Scheme, StepOptions};
use crate::partition::TaggedPartition;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    tags: Vec<f64>,
    dim: usize,
    states: Vec<f64>,
    site_index: Vec<usize>,
}

impl ParticleState {
    /// Plain state: one particle per tag, site index equal to particle index.
    pub fn new(tags: Vec<f64>, dim: usize, states: Vec<f64>) -> Result<Self> {
        let site_index = (0..tags.len()).collect();
        Self::with_sites(tags, dim, states, site_index)
    }

    pub fn with_sites(tags: Vec<f64>, dim: usize, states: Vec<f64>, site_index: Vec<usize>) -> Result<Self> {
        if dim == 0 {
            return invalid("state dimension must be positive");
        }
        if states.len() != tags.len() * dim {
            return Err(Error::ShapeMismatch { expected: tags.len() * dim, got: states.len() });
        }
        if site_index.len() != tags.len() {
            return Err(Error::ShapeMismatch { expected: tags.len(), got: site_index.len() });
        }
        if tags.is_empty() {
            return invalid("particle state needs at least one particle");
        }
        if tags.iter().chain(&states).any(|v| !v.is_finite()) {
            return invalid("particle state contains non-finite values");
        }
        Ok(Self { tags, dim, states, site_index })
    }

    /// One particle per tag of `p`.
    pub fn on_partition(p: &TaggedPartition, dim: usize, states: Vec<f64>) -> Result<Self> {
        Self::new(p.tags().to_vec(), dim, states)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    /// Row-major `M × d`.
    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    /// Zero-based partition cell of each particle.
    pub fn site_index(&self) -> &[usize] {
        &self.site_index
    }

    pub fn with_states(&self, states: Vec<f64>) -> Result<Self> {
        Self::with_sites(self.tags.clone(), self.dim, states, self.site_index.clone())
    }
}

/// `K` particles per site: tag `x_i` repeated once per sample.
pub fn cloud_state(p: &TaggedPartition, dim: usize, samples: &[Vec<Vec<f64>>]) -> Result<ParticleState> {
    if samples.len() != p.len() {
        return Err(Error::ShapeMismatch { expected: p.len(), got: samples.len() });
    }
    let k = samples[0].len();
    if k == 0 {
        return invalid("each site needs at least one sample");
    }
    let mut tags = Vec::with_capacity(p.len() * k);
    let mut states = Vec::with_capacity(p.len() * k * dim);
    let mut sites = Vec::with_capacity(p.len() * k);
    for (i, site) in samples.iter().enumerate() {
        if site.len() != k {
            return invalid(format!("ragged samples: site {i} has {} samples, expected {k}", site.len()));
        }
        for xi in site {
            if xi.len() != dim {
                return Err(Error::ShapeMismatch { expected: dim, got: xi.len() });
            }
            tags.push(p.tags()[i]);
            states.extend_from_slice(xi);
            sites.push(i);
        }
    }
    ParticleState::with_sites(tags, dim, states, sites)
}

/// Rows `Y_i = (1/M) Σ_j G(t, x_i, x_j, ξ_i, ξ_j)` for raw arrays; shared by the
/// particle, Euler and PDE solvers.
pub(crate) fn interaction_field(
    k: &InteractionKernel,
    t: f64,
    tags: &[f64],
    states: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let d = k.state_dim();
    let m = tags.len();
    let inv = 1.0 / m as f64;
    out.par_chunks_mut(d).enumerate().try_for_each(|(i, row)| {
        let xi = &states[i * d..(i + 1) * d];
        let x = tags[i];
        let mut acc = vec![0.0; d];
        k.row_sum_into(t, x, xi, tags, states, &mut acc);
        let mut g = vec![0.0; d];
        if k.diagonal_into(t, x, xi, &mut g) {
            for c in 0..d {
                acc[c] += g[c];
            }
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(first_non_finite(k, t, tags, states, i));
        }
        for c in 0..d {
            row[c] = acc[c] * inv;
        }
        Ok(())
    })
}

fn first_non_finite(k: &InteractionKernel, t: f64, tags: &[f64], states: &[f64], i: usize) -> Error {
    let d = k.state_dim();
    let xi = &states[i * d..(i + 1) * d];
    for j in 0..tags.len() {
        let g = k.eval(t, tags[i], tags[j], xi, &states[j * d..(j + 1) * d]);
        if g.iter().any(|v| !v.is_finite()) {
            return Error::NonFinite { i, j };
        }
    }
    Error::NonFinite { i, j: i }
}

/// The particle vector field, row-major `M × d`.
pub fn particle_rhs(k: &InteractionKernel, t: f64, s: &ParticleState) -> Result<Vec<f64>> {
    if k.state_dim() != s.dim() {
        return Err(Error::ShapeMismatch { expected: k.state_dim(), got: s.dim() });
    }
    let mut out = vec![0.0; s.states.len()];
    interaction_field(k, t, &s.tags, &s.states, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    tags: Vec<f64>,
    dim: usize,
    site_index: Vec<usize>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    dt: f64,
    scheme: Scheme,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    pub fn state_at(&self, idx: usize) -> ParticleState {
        ParticleState {
            tags: self.tags.clone(),
            dim: self.dim,
            states: self.states[idx].clone(),
            site_index: self.site_index.clone(),
        }
    }

    pub fn final_state(&self) -> ParticleState {
        self.state_at(self.states.len() - 1)
    }

    /// Columns `t, i, x_i, xi_1..xi_d`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(w, "t,i,x_i")?;
        for c in 1..=self.dim {
            write!(w, ",xi_{c}")?;
        }
        writeln!(w)?;
        for (t, st) in self.times.iter().zip(&self.states) {
            for (i, x) in self.tags.iter().enumerate() {
                write!(w, "{t},{i},{x}")?;
                for v in &st[i * self.dim..(i + 1) * self.dim] {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn integrate(k: &InteractionKernel, s0: &ParticleState, t_end: f64, dt: f64, scheme: Scheme) -> Result<Trajectory> {
    integrate_with(k, s0, t_end, dt, StepOptions { scheme, ..StepOptions::default() })
}

pub fn integrate_with(k: &InteractionKernel, s0: &ParticleState, t_end: f64, dt: f64, opts: StepOptions) -> Result<Trajectory> {
    if k.state_dim() != s0.dim() {
        return Err(Error::ShapeMismatch { expected: k.state_dim(), got: s0.dim() });
    }
    let tags = s0.tags.clone();
    let (times, states) =
        integrate_fixed(|t, y, out| interaction_field(k, t, &tags, y, out), &s0.states, t_end, dt, opts)?;
    Ok(Trajectory {
        tags: s0.tags.clone(),
        dim: s0.dim,
        site_index: s0.site_index.clone(),
        times,
        states,
        dt,
        scheme: opts.scheme,
    })
}
