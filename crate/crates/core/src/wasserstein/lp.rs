//! Exact transportation LP by successive shortest paths with potentials.
//!
//! Masses live on an integer grid so that every plan is exactly feasible;
//! costs stay in floating point.

use crate::error::{Error, Result};

/// Largest common denominator accepted for exact rational masses.
const MAX_SCALE: u64 = 1_000_000_000_000_000;
/// Grid used when weights are not recognisably rational.
const FALLBACK_SCALE: u64 = 1 << 40;
const MAX_DENOMINATOR: u64 = 1_000_000;

/// Integer masses summing to the same total on both sides, and that total.
pub(crate) fn integer_masses(w1: &[f64], w2: &[f64]) -> (Vec<u64>, Vec<u64>, u64) {
    if let Some(r) = rational_masses(w1, w2) {
        return r;
    }
    (largest_remainder(w1, FALLBACK_SCALE), largest_remainder(w2, FALLBACK_SCALE), FALLBACK_SCALE)
}

fn rational_masses(w1: &[f64], w2: &[f64]) -> Option<(Vec<u64>, Vec<u64>, u64)> {
    let mut fracs = Vec::with_capacity(w1.len() + w2.len());
    let mut lcm: u64 = 1;
    for &w in w1.iter().chain(w2) {
        let (p, q) = to_fraction(w)?;
        lcm = lcm_checked(lcm, q)?;
        if lcm > MAX_SCALE {
            return None;
        }
        fracs.push((p, q));
    }
    let masses: Vec<u64> = fracs.iter().map(|&(p, q)| p * (lcm / q)).collect();
    let (a, b) = masses.split_at(w1.len());
    if a.iter().sum::<u64>() != lcm || b.iter().sum::<u64>() != lcm {
        return None;
    }
    Some((a.to_vec(), b.to_vec(), lcm))
}

/// Best rational approximation with denominator at most `MAX_DENOMINATOR`,
/// accepted only if it reproduces `w` to near machine precision.
fn to_fraction(w: f64) -> Option<(u64, u64)> {
    if !(0.0..=1.0).contains(&w) {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut x = w;
    for _ in 0..64 {
        let a = x.floor();
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - w).abs() <= 4.0 * f64::EPSILON * w.max(1e-300) {
            return Some((h1, k1));
        }
        let frac = x - a as f64;
        if frac == 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    if k1 > 0 && (h1 as f64 / k1 as f64 - w).abs() <= 4.0 * f64::EPSILON * w.max(1e-300) {
        Some((h1, k1))
    } else {
        None
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm_checked(a: u64, b: u64) -> Option<u64> {
    (a / gcd(a, b)).checked_mul(b)
}

fn largest_remainder(w: &[f64], scale: u64) -> Vec<u64> {
    let total: f64 = w.iter().sum();
    let exact: Vec<f64> = w.iter().map(|v| v / total * scale as f64).collect();
    let mut m: Vec<u64> = exact.iter().map(|v| v.floor() as u64).collect();
    let assigned: u64 = m.iter().sum();
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let mut left = scale.saturating_sub(assigned);
    let mut idx = 0;
    while left > 0 {
        m[order[idx % order.len()]] += 1;
        left -= 1;
        idx += 1;
    }
    m
}

/// Optimal integer flow for supplies `a`, demands `b` (equal totals) and a
/// dense row-major cost matrix. Returns the flow matrix.
pub(crate) fn transport(a: &[u64], b: &[u64], cost: &[f64]) -> Result<Vec<u64>> {
    let n1 = a.len();
    let n2 = b.len();
    if cost.len() != n1 * n2 {
        return Err(Error::ShapeMismatch { expected: n1 * n2, got: cost.len() });
    }
    let mut supply = a.to_vec();
    let mut demand = b.to_vec();
    let mut flow = vec![0u64; n1 * n2];
    // potentials: sources 0..n1, sinks n1..n1+n2
    let v = n1 + n2;
    let mut pi = vec![0.0f64; v];
    let mut dist = vec![f64::INFINITY; v];
    let mut prev = vec![usize::MAX; v];
    let mut done = vec![false; v];
    loop {
        if supply.iter().all(|&s| s == 0) {
            break;
        }
        dist.fill(f64::INFINITY);
        prev.fill(usize::MAX);
        done.fill(false);
        for i in 0..n1 {
            if supply[i] > 0 {
                dist[i] = 0.0;
            }
        }
        let mut target = usize::MAX;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (node, &dn) in dist.iter().enumerate() {
                if !done[node] && dn < best {
                    best = dn;
                    u = node;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u >= n1 && demand[u - n1] > 0 {
                target = u;
                break;
            }
            if u < n1 {
                for j in 0..n2 {
                    let w = n1 + j;
                    if done[w] {
                        continue;
                    }
                    let rc = (cost[u * n2 + j] + pi[u] - pi[w]).max(0.0);
                    if dist[u] + rc < dist[w] {
                        dist[w] = dist[u] + rc;
                        prev[w] = u;
                    }
                }
            } else {
                let j = u - n1;
                for i in 0..n1 {
                    if done[i] || flow[i * n2 + j] == 0 {
                        continue;
                    }
                    let rc = (-cost[i * n2 + j] + pi[u] - pi[i]).max(0.0);
                    if dist[u] + rc < dist[i] {
                        dist[i] = dist[u] + rc;
                        prev[i] = u;
                    }
                }
            }
        }
        if target == usize::MAX {
            return Err(Error::InvalidArgument("transport problem is infeasible (unequal totals)".into()));
        }
        let dt = dist[target];
        for node in 0..v {
            pi[node] += dist[node].min(dt);
        }
        // bottleneck along the path
        let mut amount = demand[target - n1];
        let mut node = target;
        while prev[node] != usize::MAX {
            let p = prev[node];
            if node < n1 {
                // backward arc sink p -> source node
                amount = amount.min(flow[node * n2 + (p - n1)]);
            }
            node = p;
        }
        amount = amount.min(supply[node]);
        let origin = node;
        let mut node = target;
        while prev[node] != usize::MAX {
            let p = prev[node];
            if node >= n1 {
                flow[p * n2 + (node - n1)] += amount;
            } else {
                flow[node * n2 + (p - n1)] -= amount;
            }
            node = p;
        }
        supply[origin] -= amount;
        demand[target - n1] -= amount;
    }
    Ok(flow)
}
