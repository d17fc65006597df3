//! Higher-order methods by composing a symmetric base step with a
//! palindromic sequence of substep sizes `γ₁h, …, γ_s h`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

const KAHAN6: [f64; 9] = [
    0.392_161_444_007_314_139_28,
    0.332_599_136_789_359_438_60,
    -0.706_246_172_557_639_359_81,
    0.082_213_596_293_550_800_230,
    0.798_543_990_934_829_963_40,
    0.082_213_596_293_550_800_230,
    -0.706_246_172_557_639_359_81,
    0.332_599_136_789_359_438_60,
    0.392_161_444_007_314_139_28,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionScheme {
    gammas: Vec<f64>,
}

impl CompositionScheme {
    /// Validates `Σγ = 1` to `1e-15` and exact palindromic symmetry.
    pub fn new(gammas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidParameter(
                "composition needs at least one coefficient".into(),
            ));
        }
        if gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter(
                "composition coefficients must be finite".into(),
            ));
        }
        let s = Self { gammas };
        if (s.sum() - 1.0).abs() > 1e-15 {
            return Err(Error::InvalidParameter(format!(
                "composition coefficients sum to {}, not 1",
                s.sum()
            )));
        }
        if !s.is_palindromic() {
            return Err(Error::InvalidParameter(
                "composition coefficients must be palindromic".into(),
            ));
        }
        Ok(s)
    }

    /// The trivial composition `[1]`.
    pub fn single() -> Self {
        Self { gammas: vec![1.0] }
    }

    /// Kahan and Li's nine-stage sixth-order set.
    pub fn kahan6() -> Self {
        Self {
            gammas: KAHAN6.to_vec(),
        }
    }

    /// Yoshida's three-stage fourth-order triple jump.
    pub fn yoshida4() -> Self {
        let c = 2.0_f64.cbrt();
        let g1 = 1.0 / (2.0 - c);
        let g2 = 1.0 - 2.0 * g1;
        Self {
            gammas: vec![g1, g2, g1],
        }
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.gammas.iter().sum()
    }

    pub fn is_palindromic(&self) -> bool {
        let n = self.gammas.len();
        (0..n / 2).all(|i| self.gammas[i] == self.gammas[n - 1 - i])
    }

    /// Runs `step(γᵢh)` for `i = 1…s`, left to right.
    pub fn apply<F>(&self, h: f64, mut step: F) -> Result<()>
    where
        F: FnMut(f64) -> Result<()>,
    {
        for &g in &self.gammas {
            step(g * h)?;
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        if *self == Self::single() {
            "none".into()
        } else if *self == Self::kahan6() {
            "kahan6".into()
        } else if *self == Self::yoshida4() {
            "yoshida4".into()
        } else {
            format!("custom{:?}", self.gammas)
        }
    }
}

impl Default for CompositionScheme {
    fn default() -> Self {
        Self::single()
    }
}

impl FromStr for CompositionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "single" => Ok(Self::single()),
            "kahan6" => Ok(Self::kahan6()),
            "yoshida4" => Ok(Self::yoshida4()),
            other => Err(Error::Unknown {
                kind: "composition",
                name: other.to_string(),
            }),
        }
    }
}

/// Applies `step` with substeps `γᵢh` from `scheme`.
pub fn compose<F>(scheme: &CompositionScheme, h: f64, step: F) -> Result<()>
where
    F: FnMut(f64) -> Result<()>,
{
    scheme.apply(h, step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan6_values_and_sum() {
        let k = CompositionScheme::kahan6();
        assert_eq!(k.len(), 9);
        assert_eq!(k.gammas()[0], 0.39216144400731413928);
        assert_eq!(k.gammas()[4], 0.79854399093482996340);
        assert!((k.sum() - 1.0).abs() <= 1e-15);
        assert!(k.is_palindromic());
        assert!(CompositionScheme::new(k.gammas().to_vec()).is_ok());
        assert!(CompositionScheme::new(CompositionScheme::yoshida4().gammas().to_vec()).is_ok());
    }

    #[test]
    fn single_is_passthrough() {
        let mut seen = vec![];
        compose(&CompositionScheme::single(), 0.25, |dt| {
            seen.push(dt);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, vec![0.25]);
    }

    #[test]
    fn substeps_run_in_order() {
        let mut seen = vec![];
        CompositionScheme::kahan6()
            .apply(1.0, |dt| {
                seen.push(dt);
                Ok(())
            })
            .unwrap();
        assert_eq!(seen, KAHAN6.to_vec());
    }

    #[test]
    fn invalid_sets_are_rejected() {
        assert!(CompositionScheme::new(vec![]).is_err());
        assert!(CompositionScheme::new(vec![0.5, 0.4]).is_err());
        assert!(CompositionScheme::new(vec![0.2, 0.5, 0.3]).is_err());
        assert!("bogus".parse::<CompositionScheme>().is_err());
        assert_eq!("kahan6".parse::<CompositionScheme>().unwrap().name(), "kahan6");
    }
}
