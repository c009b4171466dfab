//! Persistence blocks: one square per diagram point, stacked with a
//! per-point value, measured against a weight.
//!
//! A point `(x, y)` owns the square centred at itself with side
//! `lambda(y)`. The block surface of a diagram is the sum of
//! `f(x, y) * indicator(square)` over its points. All integrals against the
//! weight are evaluated in closed form over rectangles.

use serde::{Deserialize, Serialize};

use crate::diagram::{DiagramPoint, Domain, PersistenceDiagram, Rect};
use crate::error::{invalid_param, Error, Result};

/// `lambda(y) = 2 tau y (y / y_max)^n (1 - y / y_max)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthFunction {
    pub tau: f64,
    pub n: u32,
    pub m: u32,
    pub pers_max: f64,
}

impl LengthFunction {
    pub fn new(tau: f64, n: u32, m: u32, pers_max: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(invalid_param("tau", format!("{tau} not in (0, 1]")));
        }
        if !(pers_max > 0.0 && pers_max.is_finite()) {
            return Err(invalid_param("pers_max", "must be positive"));
        }
        Ok(Self {
            tau,
            n,
            m,
            pers_max,
        })
    }

    /// The linear family `2 tau y`.
    pub fn linear(tau: f64, pers_max: f64) -> Result<Self> {
        Self::new(tau, 0, 0, pers_max)
    }

    /// Checked evaluation; `y` must lie in `[0, pers_max]`.
    pub fn eval(&self, y: f64) -> Result<f64> {
        if !(0.0..=self.pers_max).contains(&y) {
            return Err(Error::OutOfRange {
                value: y,
                lo: 0.0,
                hi: self.pers_max,
            });
        }
        Ok(self.side(y))
    }

    /// Unchecked evaluation (the ratio is clamped to `[0, 1]`).
    pub fn side(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut v = 2.0 * self.tau * y;
        if self.n > 0 || self.m > 0 {
            let t = (y / self.pers_max).clamp(0.0, 1.0);
            v *= t.powi(self.n as i32) * (1.0 - t).powi(self.m as i32);
        }
        v
    }

    /// Upper bound on the sup-norm Lipschitz constant over `[0, pers_max]`.
    /// Exact (`2 tau`) for the linear family.
    pub fn lipschitz(&self) -> f64 {
        // d/dt [t^(n+1) (1-t)^m] = (n+1) t^n (1-t)^m - m t^(n+1) (1-t)^(m-1);
        // each term is bounded by its coefficient on [0, 1].
        2.0 * self.tau * (self.n + 1 + self.m) as f64
    }

    /// `max lambda` over `[0, pers_max]`.
    pub fn sup(&self) -> f64 {
        let (n, m) = (self.n as f64, self.m as f64);
        let t = (n + 1.0) / (n + 1.0 + m);
        2.0 * self.tau * self.pers_max * t.powi(self.n as i32 + 1) * (1.0 - t).powi(self.m as i32)
    }
}

/// Weight `w(x, y)` of the area measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightFunction {
    /// `x + y`.
    LinearSum,
    /// `x + y + c`.
    ShiftedLinear { c: f64 },
    /// `c`.
    Constant { c: f64 },
}

impl WeightFunction {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::LinearSum => x + y,
            Self::ShiftedLinear { c } => x + y + c,
            Self::Constant { c } => c,
        }
    }

    /// `int_R w dA`, exact.
    pub fn integral(&self, r: &Rect) -> f64 {
        let area = r.area();
        if area == 0.0 {
            return 0.0;
        }
        match *self {
            Self::LinearSum => area * (0.5 * (r.x0 + r.x1) + 0.5 * (r.y0 + r.y1)),
            Self::ShiftedLinear { c } => area * (0.5 * (r.x0 + r.x1) + 0.5 * (r.y0 + r.y1) + c),
            Self::Constant { c } => area * c,
        }
    }

    /// `(min, max)` of `w` over a rectangle (attained at corners).
    pub fn range_on(&self, r: &Rect) -> (f64, f64) {
        match *self {
            Self::Constant { c } => (c, c),
            _ => (self.eval(r.x0, r.y0), self.eval(r.x1, r.y1)),
        }
    }
}

/// Point-value function `f` multiplying each square's indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointValue {
    /// `f = 1`; the block is then the identification map.
    IdentityOne,
    /// `f(a, b) = a + b`.
    WeightAtCenter,
}

impl PointValue {
    pub fn eval(&self, p: &DiagramPoint) -> f64 {
        match self {
            Self::IdentityOne => 1.0,
            Self::WeightAtCenter => p.birth + p.persistence,
        }
    }

    /// Sup-norm Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::IdentityOne => 0.0,
            Self::WeightAtCenter => 2.0,
        }
    }

    /// `max |f|` over the domain box.
    pub fn sup(&self, domain: &Domain) -> f64 {
        match self {
            Self::IdentityOne => 1.0,
            Self::WeightAtCenter => domain.birth_max + domain.pers_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `[0, birth_max] x [0, pers_max]`.
    Omega,
    /// `[-pers_max, birth_max + pers_max] x [0, 2 pers_max]`.
    OmegaPrime,
}

/// Everything that determines a persistence block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockConfig {
    pub length: LengthFunction,
    pub weight: WeightFunction,
    pub point_value: PointValue,
    pub domain: Domain,
    pub region: Region,
}

/// Flat JSON layout of a [`BlockConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockConfigJson {
    pub tau: f64,
    pub n: u32,
    pub m: u32,
    pub pers_max: f64,
    pub birth_max: f64,
    pub weight: WeightJson,
    pub point_value: PointValue,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightJson {
    pub kind: WeightKind,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    LinearSum,
    ShiftedLinear,
    Constant,
}

impl BlockConfig {
    /// `f = 1`, `w = x + y`, `lambda = 2 tau y`, integrated over `Omega`.
    pub fn production(tau: f64, domain: Domain) -> Result<Self> {
        Ok(Self {
            length: LengthFunction::linear(tau, domain.pers_max)?,
            weight: WeightFunction::LinearSum,
            point_value: PointValue::IdentityOne,
            domain,
            region: Region::Omega,
        })
    }

    /// `w = x + y + pers_max` on `Omega'`, which is nonnegative there; `tau`
    /// must be strictly below 1.
    pub fn stability(tau: f64, domain: Domain, point_value: PointValue) -> Result<Self> {
        if !(tau < 1.0) {
            return Err(Error::NonCompliant(format!(
                "tau = {tau} gives lambda = 2y, violating lambda < 2y"
            )));
        }
        Ok(Self {
            length: LengthFunction::linear(tau, domain.pers_max)?,
            weight: WeightFunction::ShiftedLinear { c: domain.pers_max },
            point_value,
            domain,
            region: Region::OmegaPrime,
        })
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        let mut c = *self;
        c.length = LengthFunction::new(tau, self.length.n, self.length.m, self.length.pers_max)?;
        Ok(c)
    }

    pub fn region_rect(&self) -> Rect {
        match self.region {
            Region::Omega => self.domain.omega(),
            Region::OmegaPrime => self.domain.omega_prime(),
        }
    }

    pub fn square(&self, p: &DiagramPoint) -> BlockSquare {
        BlockSquare {
            cx: p.birth,
            cy: p.persistence,
            side: self.length.side(p.persistence),
        }
    }

    pub fn to_json_value(&self) -> BlockConfigJson {
        let (kind, c) = match self.weight {
            WeightFunction::LinearSum => (WeightKind::LinearSum, 0.0),
            WeightFunction::ShiftedLinear { c } => (WeightKind::ShiftedLinear, c),
            WeightFunction::Constant { c } => (WeightKind::Constant, c),
        };
        BlockConfigJson {
            tau: self.length.tau,
            n: self.length.n,
            m: self.length.m,
            pers_max: self.length.pers_max,
            birth_max: self.domain.birth_max,
            weight: WeightJson { kind, c },
            point_value: self.point_value,
            region: self.region,
        }
    }

    pub fn from_json_value(j: &BlockConfigJson) -> Result<Self> {
        let weight = match j.weight.kind {
            WeightKind::LinearSum => WeightFunction::LinearSum,
            WeightKind::ShiftedLinear => WeightFunction::ShiftedLinear { c: j.weight.c },
            WeightKind::Constant => WeightFunction::Constant { c: j.weight.c },
        };
        Ok(Self {
            length: LengthFunction::new(j.tau, j.n, j.m, j.pers_max)?,
            weight,
            point_value: j.point_value,
            domain: Domain::new(j.birth_max, j.pers_max)?,
            region: j.region,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_json_value())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(text)?)
    }
}

/// Closed square centred at `(cx, cy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSquare {
    pub cx: f64,
    pub cy: f64,
    pub side: f64,
}

impl BlockSquare {
    pub fn rect(&self) -> Rect {
        let h = 0.5 * self.side;
        Rect::new(self.cx - h, self.cx + h, self.cy - h, self.cy + h)
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let h = 0.5 * self.side;
        (x - self.cx).abs() <= h && (y - self.cy).abs() <= h
    }

    pub fn center_distance(&self, other: &Self) -> f64 {
        (self.cx - other.cx).abs().max((self.cy - other.cy).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Overlap {
    Disjoint,
    Overlap { area: f64, rect: Rect },
}

impl Overlap {
    pub fn area(&self) -> f64 {
        match self {
            Self::Disjoint => 0.0,
            Self::Overlap { area, .. } => *area,
        }
    }
}

/// Overlap of two squares: positive exactly when the centre sup-distance is
/// strictly below the mean side.
///
/// Along each axis the overlap is `half - |delta|` unless one side's extent
/// contains the other's, where it is the smaller side.
pub fn square_overlap(s1: &BlockSquare, s2: &BlockSquare) -> Overlap {
    let half = 0.5 * (s1.side + s2.side);
    let dx = (s1.cx - s2.cx).abs();
    let dy = (s1.cy - s2.cy).abs();
    if dx.max(dy) >= half {
        return Overlap::Disjoint;
    }
    let small = s1.side.min(s2.side);
    let area = (half - dx).min(small) * (half - dy).min(small);
    let (a, b) = (s1.rect(), s2.rect());
    let rect = Rect::new(a.x0.max(b.x0), a.x1.min(b.x1), a.y0.max(b.y0), a.y1.min(b.y1));
    Overlap::Overlap { area, rect }
}

/// Value of the block surface at `(x, y)`; squares are closed.
pub fn eval_surface(cfg: &BlockConfig, d: &PersistenceDiagram, x: f64, y: f64) -> f64 {
    d.points
        .iter()
        .filter(|p| cfg.square(p).contains(x, y))
        .map(|p| cfg.point_value.eval(p))
        .sum()
}

/// Exact `|| block(d1) - block(d2) ||` in `L^2(w dA)` over the configured
/// region.
///
/// Square edges induce a rectangular arrangement on which the difference
/// surface is constant; the integral is a sum of `value^2 * int_cell w`.
pub fn block_l2_distance(cfg: &BlockConfig, d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    block_l2_distance_sq(cfg, d1, d2).sqrt()
}

/// Squared version of [`block_l2_distance`].
pub fn block_l2_distance_sq(
    cfg: &BlockConfig,
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
) -> f64 {
    let region = cfg.region_rect();
    // (clipped rect, signed value)
    let mut items: Vec<(Rect, f64)> = Vec::with_capacity(d1.len() + d2.len());
    for (d, sign) in [(d1, 1.0), (d2, -1.0)] {
        for p in &d.points {
            let sq = cfg.square(p);
            if sq.side <= 0.0 {
                continue;
            }
            if let Some(r) = sq.rect().intersect(&region) {
                items.push((r, sign * cfg.point_value.eval(p)));
            }
        }
    }
    weighted_sq_integral(&items, &cfg.weight)
}

/// `int (sum_k v_k 1_{R_k})^2 w dA` by a slab sweep over x.
pub(crate) fn weighted_sq_integral(items: &[(Rect, f64)], weight: &WeightFunction) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    let mut xs: Vec<f64> = items.iter().flat_map(|(r, _)| [r.x0, r.x1]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut total = 0.0;
    let mut events: Vec<(f64, f64)> = Vec::new();
    for w in xs.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let xm = 0.5 * (xa + xb);
        events.clear();
        for (r, v) in items {
            if r.x0 <= xm && xm < r.x1 {
                events.push((r.y0, *v));
                events.push((r.y1, -*v));
            }
        }
        if events.is_empty() {
            continue;
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut level = 0.0;
        let mut i = 0;
        while i < events.len() {
            let y = events[i].0;
            while i < events.len() && events[i].0 == y {
                level += events[i].1;
                i += 1;
            }
            if i < events.len() {
                let ynext = events[i].0;
                if level != 0.0 {
                    total += level * level * weight.integral(&Rect::new(xa, xb, y, ynext));
                }
            }
        }
    }
    total
}
