use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

use super::bands::BandSet;
use super::config::ModelConfig;
use super::potential::PotentialSpec;
use super::solve::KEigensystem;
use crate::error::{Error, Result};
use crate::linalg;

/// Which degenerate-region rule decided the order of a band pair at one k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingRule {
    /// Real parts coincide, so the pair is ordered by imaginary part.
    ByImag,
    /// Imaginary parts coincide, so the pair is ordered by real part.
    ByReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderingEvent {
    pub k_index: usize,
    /// Adjacent band indices `(n, n + 1)`.
    pub bands: (usize, usize),
    pub rule: OrderingRule,
    pub swapped: bool,
}

/// Two or more continuation candidates whose overlap scores were within the
/// tie tolerance. The candidate closest to the linearly extrapolated energy
/// was taken.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingAmbiguity {
    pub k_index: usize,
    pub curve: usize,
    pub candidates: Vec<usize>,
    pub chosen: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrderingLog {
    pub events: Vec<OrderingEvent>,
    pub ambiguities: Vec<TrackingAmbiguity>,
}

impl OrderingLog {
    /// Rule applied to `(n, n + 1)` at `k_index`, if any fired.
    pub fn rule_at(&self, k_index: usize, n: usize) -> Option<OrderingRule> {
        self.events
            .iter()
            .find(|e| e.k_index == k_index && e.bands.0 == n)
            .map(|e| e.rule)
    }

    pub fn count(&self, rule: OrderingRule, n: usize) -> usize {
        self.events
            .iter()
            .filter(|e| e.rule == rule && e.bands.0 == n)
            .count()
    }
}

pub(crate) fn coincide(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Link per-k eigensystems into continuous bands and order them.
///
/// Continuation between neighbouring k uses the normalized bi-orthogonal
/// overlap `|ũ_c(k_i)^dagger u(k_{i+1})| / |ũ_c(k_i)|`. Complete curves are
/// ordered by minimum real part, then minimum imaginary part, then real part
/// at the second grid point. Finally, at each k, adjacent bands whose
/// imaginary (real) parts coincide are put in ascending real (imaginary)
/// order.
pub fn order_and_track(
    systems: Vec<KEigensystem>,
    pot: &PotentialSpec,
    cfg: &ModelConfig,
) -> Result<BandSet> {
    let n_k = systems.len();
    let n_bands = cfg.n_bands;
    let window = cfg.dim().min(n_bands + 6);
    for (j, s) in systems.iter().enumerate() {
        if s.states.len() < window {
            return Err(Error::IncompleteBands {
                k_index: j,
                found: s.states.len(),
                needed: window,
            });
        }
    }
    let tol = cfg.tol;
    let mut log = OrderingLog::default();

    // path[c][j] = state index at k_j followed by curve c.
    let mut path: Vec<Vec<usize>> = (0..window).map(|c| vec![c; 1]).collect();
    for j in 0..n_k.saturating_sub(1) {
        let cur = &systems[j];
        let next = &systems[j + 1];
        let mut score = vec![vec![0.0f64; window]; window];
        for (c, row) in score.iter_mut().enumerate() {
            let from = &cur.states[path[c][j]];
            let nl = linalg::norm(&from.left);
            for (s, v) in row.iter_mut().enumerate() {
                *v = linalg::dot(&from.left, &next.states[s].right).norm() / nl;
            }
        }
        let mut curve_done = vec![false; window];
        let mut state_done = vec![false; window];
        for _ in 0..window {
            let mut best_c = usize::MAX;
            let mut best_v = -1.0;
            for c in 0..window {
                if curve_done[c] {
                    continue;
                }
                for s in 0..window {
                    if !state_done[s] && score[c][s] > best_v {
                        best_v = score[c][s];
                        best_c = c;
                    }
                }
            }
            let c = best_c;
            let tied: Vec<usize> = (0..window)
                .filter(|&s| !state_done[s] && score[c][s] >= best_v - tol.tracking_tie)
                .collect();
            let chosen = if tied.len() == 1 {
                tied[0]
            } else {
                let e_now = cur.states[path[c][j]].energy;
                let predicted = if j > 0 {
                    let e_prev = systems[j - 1].states[path[c][j - 1]].energy;
                    e_now * 2.0 - e_prev
                } else {
                    e_now
                };
                let pick = tied
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        let da = (next.states[a].energy - predicted).norm();
                        let db = (next.states[b].energy - predicted).norm();
                        da.total_cmp(&db)
                    })
                    .unwrap_or(tied[0]);
                log.ambiguities.push(TrackingAmbiguity {
                    k_index: j + 1,
                    curve: c,
                    candidates: tied,
                    chosen: pick,
                });
                pick
            };
            curve_done[c] = true;
            state_done[chosen] = true;
            path[c].push(chosen);
        }
    }

    let energy = |c: usize, j: usize| systems[j].states[path[c][j]].energy;
    let min_re = |c: usize| (0..n_k).map(|j| energy(c, j).re).fold(f64::INFINITY, f64::min);
    let min_im = |c: usize| (0..n_k).map(|j| energy(c, j).im).fold(f64::INFINITY, f64::min);
    let keys: Vec<(f64, f64, f64)> = (0..window)
        .map(|c| (min_re(c), min_im(c), energy(c, 1.min(n_k - 1)).re))
        .collect();
    let curve_cmp = |a: usize, b: usize| -> Ordering {
        let (ra, ia, sa) = keys[a];
        let (rb, ib, sb) = keys[b];
        if !coincide(ra, rb, tol.degeneracy) {
            return ra.total_cmp(&rb);
        }
        if !coincide(ia, ib, tol.degeneracy) {
            return ia.total_cmp(&ib);
        }
        sa.total_cmp(&sb)
    };
    // Insertion sort: the tolerance-based comparator is not a strict total order.
    let mut curves: Vec<usize> = (0..window).collect();
    for i in 1..window {
        let mut p = i;
        while p > 0 && curve_cmp(curves[p - 1], curves[p]) == Ordering::Greater {
            curves.swap(p - 1, p);
            p -= 1;
        }
    }

    // slot[j][b] = state index at k_j assigned to band b.
    let mut slot: Vec<Vec<usize>> = (0..n_k)
        .map(|j| curves.iter().map(|&c| path[c][j]).collect())
        .collect();
    for (j, row) in slot.iter_mut().enumerate() {
        let states = &systems[j].states;
        let mut decided: Vec<Option<(OrderingRule, bool)>> = vec![None; window - 1];
        for _ in 0..window {
            let mut changed = false;
            for b in 0..window - 1 {
                let x = states[row[b]].energy;
                let y = states[row[b + 1]].energy;
                let (rule, out_of_order) = if coincide(x.im, y.im, tol.degeneracy) {
                    (OrderingRule::ByReal, x.re > y.re)
                } else if coincide(x.re, y.re, tol.degeneracy) {
                    (OrderingRule::ByImag, x.im > y.im)
                } else {
                    continue;
                };
                let swapped = decided[b].is_some_and(|d| d.1) || out_of_order;
                decided[b] = Some((rule, swapped));
                if out_of_order {
                    row.swap(b, b + 1);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for (b, d) in decided.iter().enumerate().take(n_bands.saturating_sub(1)) {
            if let Some((rule, swapped)) = *d {
                log.events.push(OrderingEvent {
                    k_index: j,
                    bands: (b, b + 1),
                    rule,
                    swapped,
                });
            }
        }
    }

    let mut energies = vec![Vec::with_capacity(n_k); n_bands];
    let mut right = vec![Vec::with_capacity(n_k); n_bands];
    let mut left = vec![Vec::with_capacity(n_k); n_bands];
    let mut self_overlap = vec![Vec::with_capacity(n_k); n_bands];
    let mut defective = vec![Vec::with_capacity(n_k); n_bands];
    let mut spectrum = Vec::with_capacity(n_k);
    let mut k_values = Vec::with_capacity(n_k);
    for (j, mut sys) in systems.into_iter().enumerate() {
        k_values.push(sys.k);
        spectrum.push(sys.energies().collect::<Vec<Complex64>>());
        for b in 0..n_bands {
            let s = &mut sys.states[slot[j][b]];
            energies[b].push(s.energy);
            right[b].push(core::mem::take(&mut s.right));
            left[b].push(core::mem::take(&mut s.left));
            self_overlap[b].push(s.self_overlap);
            defective[b].push(s.defective);
        }
    }

    Ok(BandSet {
        potential: pot.clone(),
        config: *cfg,
        k: k_values,
        energies,
        right,
        left,
        self_overlap,
        defective,
        spectrum,
        ordering_log: log,
    })
}
