use alloc::string::String;
use alloc::vec::Vec;

use super::HoppingTable;
use crate::spectra::PotentialSpec;

/// Which symmetry relations a table is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryClass {
    /// PT-symmetric scalar potential, `A = 0`.
    Pt,
    /// Neither PT nor vector potential, e.g. complex `c`.
    General,
    /// Nonzero vector potential.
    VectorPotential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelationContext {
    pub class: SymmetryClass,
    /// Bands 1 and 2 have no exceptional points between them.
    pub separated: bool,
    /// `V(1/2 - x) = V(x)`, which fixes the two centres at `∓1/4`.
    pub quarter_reflection: bool,
}

impl RelationContext {
    pub fn from_potential(pot: &PotentialSpec, separated: bool) -> Self {
        let class = if pot.vector_a.norm() > 0.0 {
            SymmetryClass::VectorPotential
        } else if pot.is_pt_symmetric() {
            SymmetryClass::Pt
        } else {
            SymmetryClass::General
        };
        Self {
            class,
            separated,
            quarter_reflection: pot.is_reflection_symmetric(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelationId {
    /// `t11^m = t11^{-m} = (t22^m)^*`.
    IntraPt,
    /// `t12^m = (t21^{-m})^*`.
    InterHermitian,
    /// `t12^{-m} = t12^{m+1}`.
    InterReflection,
    /// `t12 = t21 = 0` for separated bands.
    InterVanishes,
    /// `t_nn^m = t_nn^{-m}`.
    IntraSymmetric,
    /// `|t_nn^1| != |t_nn^{-1}|`; the residual is `max_n ||t_nn^1/t_nn^{-1}| - 1|`.
    IntraAsymmetric,
}

impl RelationId {
    pub fn label(self) -> &'static str {
        match self {
            RelationId::IntraPt => "a",
            RelationId::InterHermitian => "b",
            RelationId::InterReflection => "c",
            RelationId::InterVanishes => "d",
            RelationId::IntraSymmetric => "e",
            RelationId::IntraAsymmetric => "f",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            RelationId::IntraPt => "t11^m = t11^-m = conj(t22^m)",
            RelationId::InterHermitian => "t12^m = conj(t21^-m)",
            RelationId::InterReflection => "t12^-m = t12^(m+1)",
            RelationId::InterVanishes => "t12 = t21 = 0",
            RelationId::IntraSymmetric => "t_nn^m = t_nn^-m",
            RelationId::IntraAsymmetric => "|t_nn^1| != |t_nn^-1|",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub id: RelationId,
    pub residual: f64,
    pub tol: f64,
    /// For [`RelationId::IntraAsymmetric`] this means the residual exceeds
    /// `tol`; for the others, that it stays below.
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationReport {
    pub context: RelationContext,
    pub checks: Vec<RelationCheck>,
    /// `|t12^0|`, reported whatever the context.
    pub t12_onsite: f64,
    pub notes: Vec<String>,
}

impl RelationReport {
    pub fn get(&self, id: RelationId) -> Option<&RelationCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> impl Iterator<Item = &RelationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Evaluate the relations that apply in `context` on a two-band table.
/// Residuals are absolute.
pub fn verify_relations(table: &HoppingTable, context: RelationContext, tol: f64) -> RelationReport {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let two = table.n >= 2;
    let mm = table.m_max as i64;
    let t = |a, b, m| table.get(a, b, m);
    let mut push = |id, residual: f64, tol: f64| {
        let passed = if id == RelationId::IntraAsymmetric {
            residual > tol
        } else {
            residual <= tol
        };
        checks.push(RelationCheck { id, residual, tol, passed });
    };

    if !two {
        notes.push("single-band table: inter-band relations skipped".into());
    }

    if context.class == SymmetryClass::Pt && two {
        let mut r = 0.0f64;
        for m in -mm..=mm {
            r = r.max((t(0, 0, m) - t(0, 0, -m)).norm());
            r = r.max((t(0, 0, m) - t(1, 1, m).conj()).norm());
        }
        push(RelationId::IntraPt, r, tol);
        let mut r = 0.0f64;
        for m in -mm..=mm {
            r = r.max((t(0, 1, m) - t(1, 0, -m).conj()).norm());
        }
        push(RelationId::InterHermitian, r, tol);
        if context.quarter_reflection {
            let mut r = 0.0f64;
            for m in -mm..mm {
                r = r.max((t(0, 1, -m) - t(0, 1, m + 1)).norm());
            }
            push(RelationId::InterReflection, r, tol);
        }
    }

    if context.separated && two && context.class != SymmetryClass::VectorPotential {
        let mut r = 0.0f64;
        for m in -mm..=mm {
            r = r.max(t(0, 1, m).norm()).max(t(1, 0, m).norm());
        }
        push(RelationId::InterVanishes, r, tol);
    }

    if context.class == SymmetryClass::General && context.separated {
        let mut r = 0.0f64;
        for n in 0..table.n {
            for m in 1..=mm {
                r = r.max((t(n, n, m) - t(n, n, -m)).norm());
            }
        }
        push(RelationId::IntraSymmetric, r, tol);
    }

    if context.class == SymmetryClass::VectorPotential && mm >= 1 {
        let mut r = 0.0f64;
        for n in 0..table.n {
            let ratio = t(n, n, 1).norm() / t(n, n, -1).norm();
            r = r.max((ratio - 1.0).abs());
        }
        push(RelationId::IntraAsymmetric, r, tol);
    }

    let t12_onsite = if two { t(0, 1, 0).norm() } else { 0.0 };
    RelationReport {
        context,
        checks,
        t12_onsite,
        notes,
    }
}

/// `|t_nn^1 / t_nn^{-1}|`.
pub fn asymmetry_ratio(table: &HoppingTable, n: usize) -> f64 {
    table.get(n, n, 1).norm() / table.get(n, n, -1).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tightbinding::Provenance;
    use crate::wannier::GaugeMethod;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn table() -> HoppingTable {
        HoppingTable::zeros(
            2,
            2,
            Provenance {
                method: GaugeMethod::Projection,
                potential: PotentialSpec::free(),
                l_max: 1,
                n_k: 1,
            },
        )
    }

    /// Hand-built table with the full PT and reflection structure.
    fn pt_table() -> HoppingTable {
        let mut t = table();
        for (m, v) in [(0, c(3.0, 1.0)), (1, c(0.5, -0.2)), (2, c(0.01, 0.02))] {
            t.set(0, 0, m, v);
            t.set(0, 0, -m, v);
            t.set(1, 1, m, v.conj());
            t.set(1, 1, -m, v.conj());
        }
        // t12^-m = t12^{m+1}: pairs (0,1), (-1,2).
        for (ms, v) in [([0, 1], c(0.7, 0.1)), ([-1, 2], c(0.05, -0.03))] {
            for m in ms {
                t.set(0, 1, m, v);
                t.set(1, 0, -m, v.conj());
            }
        }
        t
    }

    #[test]
    fn pt_relations_hold_on_structured_table() {
        let ctx = RelationContext {
            class: SymmetryClass::Pt,
            separated: false,
            quarter_reflection: true,
        };
        let r = verify_relations(&pt_table(), ctx, 1e-12);
        assert!(r.all_passed(), "{:?}", r.checks);
        assert_eq!(r.checks.len(), 3);
        assert!((r.t12_onsite - c(0.7, 0.1).norm()).abs() < 1e-15);
    }

    #[test]
    fn broken_relation_is_reported() {
        let mut t = pt_table();
        t.set(0, 1, 1, c(0.0, 0.0));
        let ctx = RelationContext {
            class: SymmetryClass::Pt,
            separated: true,
            quarter_reflection: true,
        };
        let r = verify_relations(&t, ctx, 1e-12);
        let bad: Vec<_> = r.violations().map(|c| c.id).collect();
        assert_eq!(
            bad,
            [RelationId::InterHermitian, RelationId::InterReflection, RelationId::InterVanishes]
        );
    }

    #[test]
    fn asymmetry_is_flagged() {
        let mut t = table();
        t.set(0, 0, 1, c(2.0, 0.0));
        t.set(0, 0, -1, c(1.0, 0.0));
        t.set(1, 1, 1, c(1.0, 0.0));
        t.set(1, 1, -1, c(1.0, 0.0));
        let ctx = RelationContext {
            class: SymmetryClass::VectorPotential,
            separated: true,
            quarter_reflection: false,
        };
        let r = verify_relations(&t, ctx, 0.1);
        let f = r.get(RelationId::IntraAsymmetric).unwrap();
        assert!(f.passed);
        assert!((f.residual - 1.0).abs() < 1e-15);
        assert!((asymmetry_ratio(&t, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn context_from_potential() {
        let pt = PotentialSpec::c_sin(c(0.0, 20.0));
        let ctx = RelationContext::from_potential(&pt, false);
        assert_eq!(ctx.class, SymmetryClass::Pt);
        assert!(ctx.quarter_reflection);
        let general = PotentialSpec::c_sin(c(20.0, 80.0));
        assert_eq!(RelationContext::from_potential(&general, true).class, SymmetryClass::General);
        let a = pt.with_vector_potential(c(0.0, 1.0));
        assert_eq!(RelationContext::from_potential(&a, true).class, SymmetryClass::VectorPotential);
        let cos = PotentialSpec::b_cos_c_sin(3.0, c(0.0, 20.0));
        assert!(!RelationContext::from_potential(&cos, false).quarter_reflection);
    }
}
