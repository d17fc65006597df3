//! Linear mixing and projection maps on the extended phase space.
//!
//! Every map is a pair of linear interpolations between the primary and
//! auxiliary copies: one weight for coordinates, one for momenta. The
//! complementary weights are always `1 − alpha` and cannot be set
//! independently.

use crate::error::{Error, Result};
use crate::state::{ExtendedState, PhaseState};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Mixing,
    Projection,
}

impl MapKind {
    fn name(self) -> &'static str {
        match self {
            MapKind::Mixing => "mixing",
            MapKind::Projection => "projection",
        }
    }
}

/// A symmetric linear map parametrised by the weight of the primary copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPhaseMap {
    alpha_q: f64,
    alpha_p: f64,
    kind: MapKind,
}

/// Named presets accepted wherever a map is configured.
pub const PRESET_NAMES: &[&str] = &[
    "identity",
    "swap_momenta",
    "swap_coordinates",
    "swap_both",
    "average",
    "p_one_third_two_thirds",
    "proj_primary_q_aux_p",
    "proj_aux_q_primary_p",
    "proj_average",
    "proj_primary",
    "proj_primary_q_half_p",
];

impl LinearPhaseMap {
    pub fn new(alpha_q: f64, alpha_p: f64, kind: MapKind) -> Result<Self> {
        if !alpha_q.is_finite() || !alpha_p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "map weights must be finite, got ({alpha_q}, {alpha_p})"
            )));
        }
        Ok(Self {
            alpha_q,
            alpha_p,
            kind,
        })
    }

    pub fn mixing(alpha_q: f64, alpha_p: f64) -> Result<Self> {
        Self::new(alpha_q, alpha_p, MapKind::Mixing)
    }

    pub fn projection(alpha_q: f64, alpha_p: f64) -> Result<Self> {
        Self::new(alpha_q, alpha_p, MapKind::Projection)
    }

    pub fn identity() -> Self {
        Self {
            alpha_q: 1.0,
            alpha_p: 1.0,
            kind: MapKind::Mixing,
        }
    }

    pub fn alpha_q(&self) -> f64 {
        self.alpha_q
    }

    pub fn alpha_p(&self) -> f64 {
        self.alpha_p
    }

    pub fn alpha_q_complement(&self) -> f64 {
        1.0 - self.alpha_q
    }

    pub fn alpha_p_complement(&self) -> f64 {
        1.0 - self.alpha_p
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn with_kind(self, kind: MapKind) -> Self {
        Self { kind, ..self }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha_q == 1.0 && self.alpha_p == 1.0
    }

    /// True when both weights are 0 or 1, i.e. the map is a permutation of
    /// blocks and therefore an involution.
    pub fn is_permutation(&self) -> bool {
        [self.alpha_q, self.alpha_p]
            .iter()
            .all(|&a| a == 0.0 || a == 1.0)
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        use MapKind::*;
        let (aq, ap, kind) = match name {
            "identity" => (1.0, 1.0, Mixing),
            "swap_momenta" => (1.0, 0.0, Mixing),
            "swap_coordinates" => (0.0, 1.0, Mixing),
            "swap_both" => (0.0, 0.0, Mixing),
            "average" => (0.5, 0.5, Mixing),
            "p_one_third_two_thirds" => (1.0 / 3.0, 2.0 / 3.0, Projection),
            "proj_primary_q_aux_p" => (1.0, 0.0, Projection),
            "proj_aux_q_primary_p" => (0.0, 1.0, Projection),
            "proj_average" => (0.5, 0.5, Projection),
            "proj_primary" => (1.0, 1.0, Projection),
            "proj_primary_q_half_p" => (1.0, 0.5, Projection),
            _ => {
                return Err(Error::Unknown {
                    kind: "map preset",
                    name: name.to_string(),
                })
            }
        };
        Ok(Self {
            alpha_q: aq,
            alpha_p: ap,
            kind,
        })
    }

    /// Parses either `"aq,ap"` or a preset name, forcing the requested kind.
    pub fn parse(s: &str, kind: MapKind) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once(',') {
            let parse = |v: &str| {
                v.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse map weight `{v}`"))
                })
            };
            Self::new(parse(a)?, parse(b)?, kind)
        } else {
            Ok(Self::preset(s)?.with_kind(kind))
        }
    }

    fn expect(&self, kind: MapKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::MapKind {
                expected: kind.name(),
                got: self.kind.name(),
            })
        }
    }

    /// Applies the mixing map in place; times are left alone.
    pub fn mix_in_place(&self, s: &mut ExtendedState) {
        mix_blocks(&mut s.q, &mut s.qt, self.alpha_q);
        mix_blocks(&mut s.p, &mut s.pt, self.alpha_p);
    }
}

impl fmt::Display for LinearPhaseMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.alpha_q, self.alpha_p)
    }
}

/// `a' = b + α(a − b)`, written so that equal inputs come back bit-for-bit.
#[inline]
pub(crate) fn interpolate(a: f64, b: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        a
    } else if alpha == 0.0 {
        b
    } else {
        b + alpha * (a - b)
    }
}

/// Symmetric mixing of a primary/auxiliary block pair.
pub(crate) fn mix_blocks(primary: &mut [f64], aux: &mut [f64], alpha: f64) {
    if alpha == 1.0 {
        return;
    }
    if alpha == 0.0 {
        primary.swap_with_slice(aux);
        return;
    }
    for (a, b) in primary.iter_mut().zip(aux.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = interpolate(x, y, alpha);
        *b = interpolate(y, x, alpha);
    }
}

/// Applies a mixing map, returning the new extended state.
pub fn apply_mixing(m: &LinearPhaseMap, s: &ExtendedState) -> Result<ExtendedState> {
    m.expect(MapKind::Mixing)?;
    let mut out = s.clone();
    m.mix_in_place(&mut out);
    Ok(out)
}

/// Applies a projection map back to the original phase space.
pub fn apply_projection(m: &LinearPhaseMap, s: &ExtendedState) -> Result<PhaseState> {
    m.expect(MapKind::Projection)?;
    Ok(project_unchecked(m, s))
}

pub(crate) fn project_unchecked(m: &LinearPhaseMap, s: &ExtendedState) -> PhaseState {
    let q = s
        .q
        .iter()
        .zip(&s.qt)
        .map(|(&a, &b)| interpolate(a, b, m.alpha_q))
        .collect();
    let p = s
        .p
        .iter()
        .zip(&s.pt)
        .map(|(&a, &b)| interpolate(a, b, m.alpha_p))
        .collect();
    PhaseState { q, p, tau: s.tau }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::clone_up;
    use proptest::prelude::*;

    fn ext(q: f64, qt: f64, p: f64, pt: f64) -> ExtendedState {
        ExtendedState {
            q: vec![q],
            qt: vec![qt],
            p: vec![p],
            pt: vec![pt],
            tau: 0.0,
            t: 0.0,
            tt: 0.0,
        }
    }

    #[test]
    fn swap_momenta_exchanges_p_blocks() {
        let m = LinearPhaseMap::preset("swap_momenta").unwrap();
        let out = apply_mixing(&m, &ext(1.0, 2.0, 3.0, 4.0)).unwrap();
        assert_eq!(out, ext(1.0, 2.0, 4.0, 3.0));
    }

    #[test]
    fn identity_preset() {
        let m = LinearPhaseMap::preset("identity").unwrap();
        assert_eq!((m.alpha_q(), m.alpha_p()), (1.0, 1.0));
        let s = ext(1.0, 2.0, 3.0, 4.0);
        assert_eq!(apply_mixing(&m, &s).unwrap(), s);
    }

    #[test]
    fn averaging_mixes_all_blocks() {
        let m = LinearPhaseMap::preset("average").unwrap();
        let out = apply_mixing(&m, &ext(1.0, 3.0, -2.0, 2.0)).unwrap();
        assert_eq!(out, ext(2.0, 2.0, 0.0, 0.0));
    }

    #[test]
    fn projection_presets() {
        let p1 = LinearPhaseMap::preset("proj_primary_q_aux_p").unwrap();
        assert_eq!((p1.alpha_q(), p1.alpha_p(), p1.kind()), (1.0, 0.0, MapKind::Projection));
        let p2 = LinearPhaseMap::preset("proj_aux_q_primary_p").unwrap();
        assert_eq!((p2.alpha_q(), p2.alpha_p()), (0.0, 1.0));
        let third = LinearPhaseMap::preset("p_one_third_two_thirds").unwrap();
        assert_eq!(third.alpha_q(), 1.0 / 3.0);
        assert_eq!(third.alpha_p(), 2.0 / 3.0);
        assert_eq!(third.kind(), MapKind::Projection);
        assert_eq!(third.alpha_q_complement(), 1.0 - 1.0 / 3.0);
    }

    #[test]
    fn projection_reads_selected_copies() {
        let p1 = LinearPhaseMap::preset("proj_primary_q_aux_p").unwrap();
        let out = apply_projection(&p1, &ext(1.0, 2.0, 3.0, 4.0)).unwrap();
        assert_eq!((out.q[0], out.p[0]), (1.0, 4.0));
    }

    #[test]
    fn average_projection_interpolates() {
        let eps = 1e-3;
        let m = LinearPhaseMap::preset("proj_average").unwrap();
        let out = apply_projection(&m, &ext(5.0, 5.0 + 2.0 * eps, 1.0, 1.0)).unwrap();
        assert!((out.q[0] - (5.0 + eps)).abs() < 1e-15);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let mix = LinearPhaseMap::identity();
        let proj = LinearPhaseMap::preset("proj_average").unwrap();
        let s = ext(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(apply_projection(&mix, &s), Err(Error::MapKind { .. })));
        assert!(matches!(apply_mixing(&proj, &s), Err(Error::MapKind { .. })));
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            LinearPhaseMap::preset("nope"),
            Err(Error::Unknown { .. })
        ));
    }

    #[test]
    fn parse_pairs_and_presets() {
        let m = LinearPhaseMap::parse("0.25, 0.75", MapKind::Mixing).unwrap();
        assert_eq!((m.alpha_q(), m.alpha_p()), (0.25, 0.75));
        let m = LinearPhaseMap::parse("swap_both", MapKind::Projection).unwrap();
        assert_eq!(m.kind(), MapKind::Projection);
        assert!(LinearPhaseMap::parse("a,b", MapKind::Mixing).is_err());
    }

    proptest! {
        #[test]
        fn permutation_presets_are_involutions(
            aq in prop::bool::ANY, ap in prop::bool::ANY,
            v in prop::collection::vec(-1e3f64..1e3, 4),
        ) {
            let m = LinearPhaseMap::mixing(aq as u8 as f64, ap as u8 as f64).unwrap();
            let s = ext(v[0], v[1], v[2], v[3]);
            let twice = apply_mixing(&m, &apply_mixing(&m, &s).unwrap()).unwrap();
            prop_assert_eq!(twice, s);
        }

        #[test]
        fn projection_of_clone_is_exact(
            aq in -2.0f64..3.0, ap in -2.0f64..3.0,
            q in prop::collection::vec(-1e6f64..1e6, 3),
            p in prop::collection::vec(-1e6f64..1e6, 3),
        ) {
            let s = PhaseState::new(q, p, 1.5).unwrap();
            let m = LinearPhaseMap::projection(aq, ap).unwrap();
            let out = apply_projection(&m, &clone_up(&s).unwrap()).unwrap();
            prop_assert_eq!(out, s);
        }
    }
}
