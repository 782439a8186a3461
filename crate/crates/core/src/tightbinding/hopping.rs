use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectra::{build_bloch_matrix, BandSet, PotentialSpec};
use crate::wannier::{mixed_coeffs, GaugeMethod, RealGrid, Synth, UnitaryMixing, WannierSet};

/// How a hopping table was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub method: GaugeMethod,
    pub potential: PotentialSpec,
    pub l_max: usize,
    pub n_k: usize,
}

/// `t_{nn'}^m = <w̃_n^m | H | w_{n'}^0>` for `|m| <= m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingTable {
    pub n: usize,
    pub m_max: usize,
    entries: Vec<Complex64>,
    pub provenance: Provenance,
}

impl HoppingTable {
    pub fn zeros(n: usize, m_max: usize, provenance: Provenance) -> Self {
        Self {
            n,
            m_max,
            entries: vec![Complex64::new(0.0, 0.0); n * n * (2 * m_max + 1)],
            provenance,
        }
    }

    fn index(&self, a: usize, b: usize, m: i64) -> Option<usize> {
        if a >= self.n || b >= self.n || m.unsigned_abs() as usize > self.m_max {
            return None;
        }
        let width = 2 * self.m_max + 1;
        Some((a * self.n + b) * width + (m + self.m_max as i64) as usize)
    }

    /// Band indices are zero-based; out-of-range offsets read as zero.
    pub fn get(&self, a: usize, b: usize, m: i64) -> Complex64 {
        self.index(a, b, m).map_or(Complex64::new(0.0, 0.0), |i| self.entries[i])
    }

    pub fn set(&mut self, a: usize, b: usize, m: i64, t: Complex64) {
        let i = self.index(a, b, m).expect("hopping index out of range");
        self.entries[i] = t;
    }

    /// `(n, n', m, t)` in storage order: `n`, then `n'`, then ascending `m`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, i64, Complex64)> + '_ {
        let width = 2 * self.m_max + 1;
        self.entries.iter().enumerate().map(move |(i, &t)| {
            let m = (i % width) as i64 - self.m_max as i64;
            let pair = i / width;
            (pair / self.n, pair % self.n, m, t)
        })
    }

    /// Copy keeping offsets `|m| <= range`.
    pub fn truncated(&self, range: usize) -> HoppingTable {
        let range = range.min(self.m_max);
        let mut out = HoppingTable::zeros(self.n, range, self.provenance.clone());
        for (a, b, m, t) in self.iter() {
            if m.unsigned_abs() as usize <= range {
                out.set(a, b, m, t);
            }
        }
        out
    }

    /// `max |t - other|` over the common index range.
    pub fn max_difference(&self, other: &HoppingTable) -> f64 {
        let m_max = self.m_max.min(other.m_max) as i64;
        let n = self.n.min(other.n);
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for m in -m_max..=m_max {
                    worst = worst.max((self.get(a, b, m) - other.get(a, b, m)).norm());
                }
            }
        }
        worst
    }
}

/// k-space route: `t_{nn'}^m = (1/N) sum_k e^{ikm} [U^dagger E U]_{nn'}(k)`,
/// so that `H_t(k) = sum_m t^m e^{-ikm}` reproduces `U^dagger E U` on the grid.
pub fn hoppings_from_bands(bands: &BandSet, u: &UnitaryMixing, m_max: usize) -> Result<HoppingTable> {
    if u.n > bands.n_bands() {
        return Err(Error::IncompleteBands {
            k_index: 0,
            found: bands.n_bands(),
            needed: u.n,
        });
    }
    let n = u.n;
    let n_k = bands.n_k();
    let mut table = HoppingTable::zeros(n, m_max, provenance(bands, u.method));
    // Rotated Hamiltonian U^dagger E U at every k.
    let rotated: Vec<Vec<Complex64>> = (0..n_k)
        .map(|j| {
            let mut h = vec![Complex64::new(0.0, 0.0); n * n];
            for a in 0..n {
                for b in 0..n {
                    h[a * n + b] = (0..n)
                        .map(|l| u.get(j, l, a).conj() * bands.energy(l, j) * u.get(j, l, b))
                        .sum();
                }
            }
            h
        })
        .collect();
    for m in -(m_max as i64)..=m_max as i64 {
        let phases: Vec<Complex64> = bands
            .k
            .iter()
            .map(|&k| Complex64::from_polar(1.0 / n_k as f64, k * m as f64))
            .collect();
        for a in 0..n {
            for b in 0..n {
                let t = phases.iter().zip(&rotated).map(|(p, h)| p * h[a * n + b]).sum();
                table.set(a, b, m, t);
            }
        }
    }
    Ok(table)
}

/// Real-space route: build `H w_{n'}^0` by applying the plane-wave Bloch
/// matrix to the mixed coefficients (no eigenvalues involved), then take grid
/// inner products with the translated `w̃_n^m`.
pub fn hoppings_real_space(
    bands: &BandSet,
    u: &UnitaryMixing,
    set: &WannierSet,
    m_max: usize,
) -> Result<HoppingTable> {
    let grid = RealGrid::new(set.grid.n_x, bands.n_k())?;
    if grid != set.grid || set.n_w() != u.n {
        return Err(Error::InvalidConfig {
            field: "n_x",
            reason: "Wannier set does not match the bands".into(),
        });
    }
    let synth = Synth::new(grid, bands.config.l_max);
    let matrices = bands
        .k
        .iter()
        .map(|&k| build_bloch_matrix(k, &bands.potential, &bands.config))
        .collect::<Result<Vec<_>>>()?;
    let mut table = HoppingTable::zeros(u.n, m_max, provenance(bands, u.method));
    for b in 0..u.n {
        let coeffs = mixed_coeffs(&bands.right, u, b);
        let raw = synth.function(&bands.k, &coeffs);
        let applied: Vec<Vec<Complex64>> = matrices.iter().zip(&coeffs).map(|(h, c)| h.apply(c)).collect();
        let mut hw = synth.function(&bands.k, &applied);
        // Reuse the normalization that build_wannier applied to w_b^0.
        let peak = (0..raw.len())
            .max_by(|&i, &j| raw[i].norm().total_cmp(&raw[j].norm()))
            .unwrap_or(0);
        let scale = set.w[b][peak] / raw[peak];
        for v in &mut hw {
            *v *= scale;
        }
        for a in 0..u.n {
            for m in -(m_max as i64)..=m_max as i64 {
                let left = set.shifted_tilde(a, m);
                table.set(a, b, m, set.inner(&left, &hw));
            }
        }
    }
    Ok(table)
}

fn provenance(bands: &BandSet, method: GaugeMethod) -> Provenance {
    Provenance {
        method,
        potential: bands.potential.clone(),
        l_max: bands.config.l_max,
        n_k: bands.n_k(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{dispersion, ModelConfig};
    use crate::wannier::{build_wannier, diagonal_gauge, fix_phases};
    use crate::ep::EpConfig;

    fn prov() -> Provenance {
        Provenance {
            method: GaugeMethod::Diagonal,
            potential: PotentialSpec::free(),
            l_max: 1,
            n_k: 1,
        }
    }

    #[test]
    fn table_indexing_round_trips() {
        let mut t = HoppingTable::zeros(2, 2, prov());
        t.set(1, 0, -2, Complex64::new(1.0, 2.0));
        assert_eq!(t.get(1, 0, -2), Complex64::new(1.0, 2.0));
        assert_eq!(t.get(1, 0, 3), Complex64::new(0.0, 0.0));
        let found: Vec<_> = t.iter().filter(|e| e.3.norm() > 0.0).collect();
        assert_eq!(found, vec![(1, 0, -2, Complex64::new(1.0, 2.0))]);
        assert_eq!(t.truncated(1).get(1, 0, -2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn free_band_hoppings_are_fourier_sums_of_k_squared() {
        let cfg = ModelConfig::new(6, 40, 1).unwrap();
        let b = dispersion(&PotentialSpec::free(), &cfg).unwrap();
        let u = crate::wannier::identity_gauge(&b.k, 1);
        let t = hoppings_from_bands(&b, &u, 3).unwrap();
        let grid = cfg.k_grid();
        let ks = grid.points();
        for m in -3i64..=3 {
            // Oracle: direct cosine sum of k^2 over the grid.
            let want: f64 = ks.iter().map(|k| k * k * (k * m as f64).cos()).sum::<f64>() / 40.0;
            let got = t.get(0, 0, m);
            assert!((got.re - want).abs() < 1e-12, "m={m}");
            assert!(got.im.abs() < 1e-12);
        }
        let gamma: f64 = ks.iter().map(|k| k * k).sum::<f64>() / 40.0;
        assert!((t.get(0, 0, 0).re - gamma).abs() < 1e-12);
    }

    #[test]
    fn two_routes_agree_for_separated_bands() {
        let cfg = ModelConfig::new(16, 24, 2).unwrap();
        let b = dispersion(&PotentialSpec::c_sin(Complex64::new(0.0, 200.0)), &cfg).unwrap();
        let (b, _) = fix_phases(&b).unwrap();
        let u = diagonal_gauge(&b, &EpConfig::default()).unwrap();
        let set = build_wannier(&b, &u, 32, (-2, 2)).unwrap();
        let k_route = hoppings_from_bands(&b, &u, 2).unwrap();
        let x_route = hoppings_real_space(&b, &u, &set, 2).unwrap();
        assert!(k_route.max_difference(&x_route) < 1e-8);
        let t = k_route.get(0, 0, 1);
        assert!((t - k_route.get(0, 0, -1)).norm() < 1e-10);
        assert!((t - k_route.get(1, 1, 1).conj()).norm() < 1e-10);
        assert!((k_route.get(0, 0, 0) - k_route.get(1, 1, 0).conj()).norm() < 1e-10);
    }
}
