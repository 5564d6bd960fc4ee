//! Pinned tolerances. Every suite reads its thresholds from here, and the
//! command line can override them by key with `--tol KEY=VAL`.

use std::collections::BTreeMap;

/// Default seed of every suite.
pub const SEED: u64 = 0xC0FFEE;
/// Central-difference step for exterior derivatives.
pub const FD_STEP: f64 = 1e-4;

/// Cartan identities by finite differences.
pub const CARTAN: f64 = 1e-5;
/// `dω = −Φ*η` by finite differences.
pub const D_OMEGA: f64 = 1e-5;
/// The same identity for abelian models, where both sides vanish.
pub const D_OMEGA_ABELIAN: f64 = 1e-12;
/// Moment condition, purely algebraic.
pub const MOMENT: f64 = 1e-12;
/// Lower bound on the smallest singular value of `[ω; dΦ]`.
pub const MIN_DEGENERACY: f64 = 1e-9;
/// Principal angle between `ker ω` and the explicit kernel.
pub const KERNEL_ANGLE: f64 = 1e-7;
/// Transport of ω between gluing patterns.
pub const PATTERN_COMPARE: f64 = 1e-10;
/// Closed-form cylinder ω against the bullet-product ω.
pub const CLOSED_FORM: f64 = 1e-12;
/// Groupoid multiplicativity.
pub const MULTIPLICATIVE: f64 = 1e-10;
/// Target of a Dehn-twisted arrow: equal up to rounding in `c a a⁻¹`.
pub const DEHN_PHI: f64 = 1e-12;
/// ω-invariance under the Dehn twist.
pub const DEHN_OMEGA: f64 = 1e-10;
/// Flow derivative against the Hamiltonian vector.
pub const FLOW_DERIVATIVE: f64 = 1e-7;
/// RK4 endpoint against the explicit flow at `t = 1` with 1000 steps.
pub const RK4_ENDPOINT: f64 = 1e-6;
/// Boundary holonomy drift along explicit flows.
pub const PHI_DRIFT: f64 = 1e-10;
/// Goldman bracket against `ω(X_f, X_g)`.
pub const BRACKET: f64 = 1e-8;
/// Orbit momentum condition.
pub const ORBIT_MOMENTUM: f64 = 1e-12;
/// Source-fiber descent of the orbit form.
pub const ORBIT_DESCENT: f64 = 1e-10;
/// Trivialization pairing law.
pub const PAIRING: f64 = 1e-13;
/// Isotropy of the `A` fibers.
pub const ISOTROPY: f64 = 1e-12;
/// Range/kernel principal angles.
pub const RANGE_KERNEL: f64 = 1e-7;
/// Bivector against the numeric bracket.
pub const BIVECTOR: f64 = 1e-8;
/// Antisymmetry of the bivector.
pub const ANTISYMMETRY: f64 = 1e-12;
/// Null directions of ω on the level set against orbit directions.
pub const REDUCTION_ANGLE: f64 = 1e-6;

/// Named tolerances with overrides applied.
#[derive(Clone, Debug, Default)]
pub struct Tolerances {
    overrides: BTreeMap<String, f64>,
}

impl Tolerances {
    /// Parse `KEY=VAL` overrides.
    pub fn parse(pairs: &[String]) -> Result<Self, String> {
        let mut overrides = BTreeMap::new();
        for p in pairs {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("tolerance `{p}` is not KEY=VAL"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("tolerance `{p}` has no numeric value"))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("tolerance `{p}` must be finite and non-negative"));
            }
            overrides.insert(k.trim().to_string(), v);
        }
        Ok(Tolerances { overrides })
    }

    pub fn get(&self, key: &str, default: f64) -> f64 {
        self.overrides.get(key).copied().unwrap_or(default)
    }

    pub fn overrides(&self) -> &BTreeMap<String, f64> {
        &self.overrides
    }
}
