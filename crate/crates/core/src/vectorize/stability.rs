//! Machine-checked Wasserstein stability bounds for the identification map
//! and for VPBs.

use serde::Serialize;

use super::{vpb_values, GridPartition};
use crate::block::{block_l2_distance, BlockConfig, PointValue, Region, WeightFunction};
use crate::diagram::PersistenceDiagram;
use crate::error::{Error, Result};
use crate::metrics::{vector_distance, wasserstein_distance, Norm};

/// Outcome of the identification-map bounds (`f = 1`, `L^2(w dA)` norm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentificationCertificate {
    pub lhs: f64,
    pub m: f64,
    pub n: usize,
    pub w_half: f64,
    pub w_two: f64,
    /// `2 M sqrt(M+1) W_{1/2}`.
    pub rhs_half: f64,
    /// `4 N M sqrt(M+1) W_2^{1/2}`.
    pub rhs_two: f64,
    pub holds_half: bool,
    pub holds_two: bool,
}

/// Outcome of the VPB bounds (Euclidean norm of the vector difference).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub lhs: f64,
    pub m: f64,
    pub mu_g: f64,
    pub n: usize,
    pub w_half: f64,
    pub w_two: f64,
    /// `2 M^2 sqrt(mu(G) (2M+1)) W_{1/2}`.
    pub rhs: f64,
    /// `4 N M^2 sqrt(mu(G) (2M+1)) W_2^{1/2}`.
    pub rhs_corollary: f64,
    pub holds: bool,
    pub holds_corollary: bool,
}

fn check_common(cfg: &BlockConfig, d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> Result<()> {
    if !(cfg.length.tau < 1.0) {
        return Err(Error::NonCompliant("tau must be below 1".into()));
    }
    let (lo, _) = cfg.weight.range_on(&cfg.domain.omega_prime());
    if lo < 0.0 {
        return Err(Error::NonCompliant(format!(
            "weight reaches {lo} on the enlarged box; it must be nonnegative"
        )));
    }
    for p in d1.points.iter().chain(&d2.points) {
        if !cfg.domain.contains(p) {
            return Err(Error::NonCompliant(format!(
                "point ({}, {}) lies outside the domain",
                p.birth, p.persistence
            )));
        }
    }
    Ok(())
}

fn weight_sup(cfg: &BlockConfig) -> f64 {
    let (lo, hi) = cfg.weight.range_on(&cfg.domain.omega_prime());
    lo.abs().max(hi.abs())
}

/// Certificate for the identification map. The left side is measured over
/// the enlarged box, which dominates the first-quadrant version.
pub fn identification_certificate(
    cfg: &BlockConfig,
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
) -> Result<IdentificationCertificate> {
    check_common(cfg, d1, d2)?;
    if cfg.point_value != PointValue::IdentityOne {
        return Err(Error::NonCompliant("identification map needs f = 1".into()));
    }
    let mut full = *cfg;
    full.region = Region::OmegaPrime;
    let lhs = block_l2_distance(&full, d1, d2);
    let m = cfg.length.lipschitz().max(cfg.length.sup()).max(weight_sup(cfg));
    let n = d1.len().max(d2.len());
    let w_half = wasserstein_distance(d1, d2, 0.5)?;
    let w_two = wasserstein_distance(d1, d2, 2.0)?;
    let k = m * (m + 1.0).sqrt();
    let rhs_half = 2.0 * k * w_half;
    let rhs_two = 4.0 * n as f64 * k * w_two.sqrt();
    Ok(IdentificationCertificate {
        lhs,
        m,
        n,
        w_half,
        w_two,
        rhs_half,
        rhs_two,
        holds_half: lhs <= rhs_half,
        holds_two: lhs <= rhs_two,
    })
}

/// Certificate for VPBs. The grid must partition exactly the configured
/// region.
pub fn vpb_stability_certificate(
    cfg: &BlockConfig,
    grid: &GridPartition,
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
) -> Result<StabilityCertificate> {
    check_common(cfg, d1, d2)?;
    if grid.region != cfg.region_rect() {
        return Err(Error::NonCompliant(
            "grid must partition the configured integration region".into(),
        ));
    }
    let lhs = vector_distance(&vpb_values(cfg, grid, d1), &vpb_values(cfg, grid, d2), Norm::L2)?;
    let m = [
        cfg.point_value.lipschitz(),
        cfg.point_value.sup(&cfg.domain),
        cfg.length.lipschitz(),
        cfg.length.sup(),
        weight_sup(cfg),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let mu_g = measure_of_g(cfg)?;
    let n = d1.len().max(d2.len());
    let w_half = wasserstein_distance(d1, d2, 0.5)?;
    let w_two = wasserstein_distance(d1, d2, 2.0)?;
    let k = m * m * (mu_g * (2.0 * m + 1.0)).sqrt();
    let rhs = 2.0 * k * w_half;
    let rhs_corollary = 4.0 * n as f64 * k * w_two.sqrt();
    Ok(StabilityCertificate {
        lhs,
        m,
        mu_g,
        n,
        w_half,
        w_two,
        rhs,
        rhs_corollary,
        holds: lhs <= rhs,
        holds_corollary: lhs <= rhs_corollary,
    })
}

/// `int_G w dA`, where `G` is `Omega` for a first-quadrant partition and the
/// union of all squares centred in `Omega` otherwise. The second case is
/// supported for the linear length family only.
pub fn measure_of_g(cfg: &BlockConfig) -> Result<f64> {
    let d = cfg.domain;
    match cfg.region {
        Region::Omega => Ok(cfg.weight.integral(&d.omega())),
        Region::OmegaPrime => {
            if cfg.length.n != 0 || cfg.length.m != 0 {
                return Err(Error::Invalid(
                    "union-of-squares measure is implemented for lambda = 2 tau y only".into(),
                ));
            }
            Ok(union_of_squares_measure(cfg.length.tau, d.birth_max, d.pers_max, &cfg.weight))
        }
    }
}

/// Squares with side `2 tau y` centred in `[0, a] x [0, b]`: the horizontal
/// section at height `v` is `[-tau Y, a + tau Y]` with
/// `Y = min(b, v / (1 - tau))`, for `v` up to `(1 + tau) b`. The section
/// integral is a quadratic in `v` on each linear piece of `Y`, so two-point
/// Gauss-Legendre is exact.
fn union_of_squares_measure(tau: f64, a: f64, b: f64, w: &WeightFunction) -> f64 {
    let line = |v: f64| {
        let y = if tau < 1.0 { (v / (1.0 - tau)).min(b) } else { b };
        let (x0, x1) = (-tau * y, a + tau * y);
        let mid = 0.5 * (x0 + x1);
        (x1 - x0) * w.eval(mid, v)
    };
    let knot = (1.0 - tau) * b;
    let top = (1.0 + tau) * b;
    gauss2(&line, 0.0, knot) + gauss2(&line, knot, top)
}

fn gauss2(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let g = h / 3f64.sqrt();
    h * (f(c - g) + f(c + g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{Domain, Rect};
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn dom() -> Domain {
        Domain::new(2.0, 1.0).unwrap()
    }

    fn rand_pd(rng: &mut crate::rng::Rng, max: usize) -> PersistenceDiagram {
        let k = rng.random_range(0..=max);
        let pts: Vec<(f64, f64)> = (0..k).map(|_| (rng.random_range(0.0..2.0), rng.random_range(0.0..1.0))).collect();
        PersistenceDiagram::from_pairs(1, &pts).unwrap()
    }

    #[test]
    fn identical_diagrams_hold_trivially() {
        let cfg = BlockConfig::stability(0.5, dom(), PointValue::IdentityOne).unwrap();
        let grid = GridPartition::new(cfg.region_rect(), 4, 4).unwrap();
        let d = PersistenceDiagram::from_pairs(1, &[(1.0, 0.5), (0.2, 0.9)]).unwrap();
        let c = vpb_stability_certificate(&cfg, &grid, &d, &d).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.holds && c.holds_corollary);
        let i = identification_certificate(&cfg, &d, &d).unwrap();
        assert_eq!(i.lhs, 0.0);
        assert!(i.holds_half && i.holds_two);
    }

    #[test]
    fn rejects_noncompliant() {
        let prod = BlockConfig::production(0.5, dom()).unwrap();
        let grid = GridPartition::new(prod.region_rect(), 2, 2).unwrap();
        let d = PersistenceDiagram::from_pairs(1, &[(1.0, 0.5)]).unwrap();
        assert!(matches!(vpb_stability_certificate(&prod, &grid, &d, &d), Err(Error::NonCompliant(_))));
        let cfg = BlockConfig::stability(0.5, dom(), PointValue::IdentityOne).unwrap();
        let wrong = GridPartition::new(Rect::new(0.0, 2.0, 0.0, 1.0), 2, 2).unwrap();
        assert!(vpb_stability_certificate(&cfg, &wrong, &d, &d).is_err());
        let outside = PersistenceDiagram::from_pairs(1, &[(3.0, 0.5)]).unwrap();
        assert!(identification_certificate(&cfg, &outside, &d).is_err());
        assert!(BlockConfig::stability(1.0, dom(), PointValue::IdentityOne).is_err());
    }

    #[test]
    fn measure_of_g_matches_monte_carlo() {
        let mut rng = rng_from_seed(11);
        for tau in [0.1, 0.5, 0.9] {
            let cfg = BlockConfig::stability(tau, dom(), PointValue::IdentityOne).unwrap();
            let exact = measure_of_g(&cfg).unwrap();
            let r = cfg.domain.omega_prime();
            let inside = |x: f64, y: f64| {
                // some center (cx, cy) in Omega with |x-cx| <= tau cy, |y-cy| <= tau cy
                let lo = y / (1.0 + tau);
                let hi = (y / (1.0 - tau)).min(1.0);
                if lo > hi {
                    return false;
                }
                let reach = tau * hi;
                x >= -reach && x <= 2.0 + reach
            };
            let n = 400_000;
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let x = rng.random_range(r.x0..r.x1);
                let y = rng.random_range(r.y0..r.y1);
                let v = if inside(x, y) { cfg.weight.eval(x, y) } else { 0.0 };
                s += v;
                s2 += v * v;
            }
            let mean = s / n as f64;
            let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt() * r.area();
            assert!((mean * r.area() - exact).abs() < 4.0 * se, "tau {tau}: {exact} vs {}", mean * r.area());
        }
        let omega = BlockConfig::production(0.5, dom()).unwrap();
        assert!((measure_of_g(&omega).unwrap() - 2.0 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn random_pairs_hold() {
        let mut rng = rng_from_seed(5);
        for pv in [PointValue::IdentityOne, PointValue::WeightAtCenter] {
            let cfg = BlockConfig::stability(0.6, dom(), pv).unwrap();
            let grid = GridPartition::new(cfg.region_rect(), 5, 3).unwrap();
            for _ in 0..300 {
                let (a, b) = (rand_pd(&mut rng, 6), rand_pd(&mut rng, 6));
                let c = vpb_stability_certificate(&cfg, &grid, &a, &b).unwrap();
                assert!(c.holds && c.holds_corollary);
                if pv == PointValue::IdentityOne {
                    let i = identification_certificate(&cfg, &a, &b).unwrap();
                    assert!(i.holds_half && i.holds_two);
                }
            }
        }
    }
}
