//! Flexibility domains as unions of basic semialgebraic sets.
//!
//! A [`FlexDomain`] is `⋃ₖ Fᵏ` with `Fᵏ = {x | gⱼᵏ(x) >= 0 ∀j}`. The four DER
//! families (battery, PV inverter, wind inverter, air-conditioner) have
//! dedicated constructors; arbitrary domains come in through
//! [`DerSpec::Custom`].
//!
//! Every continuous domain is probed at construction by rejection sampling
//! inside a box four times its rated size. An accepted sample on the edge of
//! that box means the domain is unbounded and it is rejected. The accepted
//! samples also provide one interior anchor per piece for ray-marched
//! boundary sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::polynomial::{Monomial, Poly2};
use crate::prototype::Halfplane;
use crate::{Error, Point, Result};

const PROBE_SAMPLES: usize = 100_000;
const PROBE_SEED: u64 = 0x5eed_f1e4;
const BISECTION_STEPS: usize = 50;

/// One basic semialgebraic set `{x | g(x) >= 0 for every constraint g}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasicSet {
    constraints: Vec<Poly2>,
    label: String,
    /// Exact location when the set is a single point.
    point: Option<Point>,
    /// Linear separators `a·x <= c` outside of which another piece takes
    /// over. Empty means the piece is responsible for the whole plane.
    cell: Vec<Halfplane>,
}

impl BasicSet {
    pub fn new(constraints: Vec<Poly2>, label: impl Into<String>) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::InvalidParameter(
                "a basic set needs at least one constraint".into(),
            ));
        }
        Ok(Self {
            constraints,
            label: label.into(),
            point: None,
            cell: Vec::new(),
        })
    }

    /// The single point `c`, encoded as `−(p − c_p)² >= 0, −(q − c_q)² >= 0`.
    pub fn point(c: Point, label: impl Into<String>) -> Self {
        let dp = Poly2::linear(1.0, 0.0, -c.p);
        let dq = Poly2::linear(0.0, 1.0, -c.q);
        Self {
            constraints: vec![-&(&dp * &dp), -&(&dq * &dq)],
            label: label.into(),
            point: Some(c),
            cell: Vec::new(),
        }
    }

    pub fn with_cell(mut self, cell: Vec<Halfplane>) -> Self {
        self.cell = cell;
        self
    }

    pub fn constraints(&self) -> &[Poly2] {
        &self.constraints
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn as_point(&self) -> Option<Point> {
        self.point
    }

    pub fn cell(&self) -> &[Halfplane] {
        &self.cell
    }

    pub fn max_degree(&self) -> u32 {
        self.constraints
            .iter()
            .map(|g| g.degree().max(0) as u32)
            .max()
            .unwrap_or(0)
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        self.constraints.iter().all(|g| g.eval(x) >= -tol)
    }

    /// Smallest constraint value at `x`.
    pub fn min_constraint(&self, x: Point) -> f64 {
        self.constraints
            .iter()
            .map(|g| g.eval(x))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Continuous,
    Discrete,
}

/// Axis-aligned box `[p_min, p_max] × [q_min, q_max]` in kW / kvar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
}

impl BoundingBox {
    pub fn around(points: impl IntoIterator<Item = Point>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BoundingBox {
            p_min: first.p,
            p_max: first.p,
            q_min: first.q,
            q_max: first.q,
        };
        for x in it {
            b.p_min = b.p_min.min(x.p);
            b.p_max = b.p_max.max(x.p);
            b.q_min = b.q_min.min(x.q);
            b.q_max = b.q_max.max(x.q);
        }
        Some(b)
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.p_min + self.p_max),
            0.5 * (self.q_min + self.q_max),
        )
    }

    /// Larger of the two half-widths.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.p_max - self.p_min).max(self.q_max - self.q_min)
    }

    pub fn diagonal(&self) -> f64 {
        (self.p_max - self.p_min).hypot(self.q_max - self.q_min)
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        x.p >= self.p_min - tol
            && x.p <= self.p_max + tol
            && x.q >= self.q_min - tol
            && x.q <= self.q_max + tol
    }

    pub fn union(&self, o: &BoundingBox) -> BoundingBox {
        BoundingBox {
            p_min: self.p_min.min(o.p_min),
            p_max: self.p_max.max(o.p_max),
            q_min: self.q_min.min(o.q_min),
            q_max: self.q_max.max(o.q_max),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Point {
        let p = if self.p_max > self.p_min {
            rng.gen_range(self.p_min..self.p_max)
        } else {
            self.p_min
        };
        let q = if self.q_max > self.q_min {
            rng.gen_range(self.q_min..self.q_max)
        } else {
            self.q_min
        };
        Point::new(p, q)
    }
}

/// A raw piece in a custom DER description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CustomPiece {
    Point {
        point: Point,
    },
    Set {
        constraints: Vec<Poly2>,
        #[serde(default)]
        label: Option<String>,
        /// Separating halfplanes as `[a_p, a_q, offset]` rows.
        #[serde(default)]
        cell: Vec<[f64; 3]>,
    },
}

fn default_scale() -> f64 {
    1.0
}

/// DER description as it appears in fleet configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "type",
    content = "params",
    rename_all = "lowercase",
    deny_unknown_fields
)]
pub enum DerSpec {
    Battery {
        p_max: f64,
        s: f64,
    },
    Pv {
        p_max: f64,
        s: f64,
    },
    Wind {
        p_max: f64,
        p0: f64,
        q0: f64,
        s1: f64,
        s2: f64,
        rotor_coupling: f64,
    },
    Ac {
        p_max: f64,
        gamma: f64,
    },
    Custom {
        pieces: Vec<CustomPiece>,
        /// Rated size used for the compactness probe.
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

impl DerSpec {
    pub fn build(&self) -> Result<FlexDomain> {
        match *self {
            DerSpec::Battery { p_max, s } => make_battery(p_max, s),
            DerSpec::Pv { p_max, s } => make_pv(p_max, s),
            DerSpec::Wind {
                p_max,
                p0,
                q0,
                s1,
                s2,
                rotor_coupling,
            } => make_wind(p_max, p0, q0, s1, s2, rotor_coupling),
            DerSpec::Ac { p_max, gamma } => make_ac(p_max, gamma),
            DerSpec::Custom { ref pieces, scale } => make_custom(pieces, scale),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            DerSpec::Battery { .. } => "battery",
            DerSpec::Pv { .. } => "pv",
            DerSpec::Wind { .. } => "wind",
            DerSpec::Ac { .. } => "ac",
            DerSpec::Custom { .. } => "custom",
        }
    }
}

/// `F = ⋃ₖ Fᵏ`.
#[derive(Clone, Debug)]
pub struct FlexDomain {
    pieces: Vec<BasicSet>,
    kind: DomainKind,
    bounding_box: BoundingBox,
    anchors: Vec<Point>,
    spec: DerSpec,
    /// Set when this domain is a single piece extracted from `spec`.
    piece_of: Option<usize>,
}

impl FlexDomain {
    /// Assembles a domain and runs the compactness probe.
    ///
    /// `rated` sets the probe box `[−4·rated, 4·rated]²`; `known_box`, when
    /// given, is the exact bounding box and replaces the sampled estimate.
    fn assemble(
        pieces: Vec<BasicSet>,
        spec: DerSpec,
        rated: f64,
        known_box: Option<BoundingBox>,
    ) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameter(
                "domain needs at least one piece".into(),
            ));
        }
        let discrete = pieces.iter().all(|s| s.point.is_some());
        if discrete {
            let bbox = BoundingBox::around(pieces.iter().filter_map(|s| s.point)).unwrap();
            let anchors = pieces.iter().map(|s| s.point.unwrap()).collect();
            return Ok(Self {
                pieces,
                kind: DomainKind::Discrete,
                bounding_box: bbox,
                anchors,
                spec,
                piece_of: None,
            });
        }

        let half = 4.0 * rated;
        let probe = BoundingBox {
            p_min: -half,
            p_max: half,
            q_min: -half,
            q_max: half,
        };
        let edge = 0.99 * half;
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let mut hits: Vec<Vec<Point>> = vec![Vec::new(); pieces.len()];
        for _ in 0..PROBE_SAMPLES {
            let x = probe.sample(&mut rng);
            let mut accepted = false;
            for (k, piece) in pieces.iter().enumerate() {
                if piece.point.is_none() && piece.contains(x, 0.0) {
                    hits[k].push(x);
                    accepted = true;
                }
            }
            if accepted && (x.p.abs() >= edge || x.q.abs() >= edge) {
                return Err(Error::Unbounded(format!("({:.4}, {:.4})", x.p, x.q)));
            }
        }

        let bbox = match known_box {
            Some(b) => b,
            None => {
                let pad = 0.02 * 2.0 * half;
                let all = hits
                    .iter()
                    .flatten()
                    .copied()
                    .chain(pieces.iter().filter_map(|s| s.point));
                let b = BoundingBox::around(all).ok_or_else(|| {
                    Error::InvalidParameter("domain has no interior samples".into())
                })?;
                BoundingBox {
                    p_min: (b.p_min - pad).max(-half),
                    p_max: (b.p_max + pad).min(half),
                    q_min: (b.q_min - pad).max(-half),
                    q_max: (b.q_max + pad).min(half),
                }
            }
        };

        // Small pieces may be missed by the wide probe; retry inside the box.
        for (k, piece) in pieces.iter().enumerate() {
            if piece.point.is_none() && hits[k].len() < 16 {
                for _ in 0..PROBE_SAMPLES {
                    let x = bbox.sample(&mut rng);
                    if piece.contains(x, 0.0) {
                        hits[k].push(x);
                    }
                }
            }
        }

        let mut anchors = Vec::with_capacity(pieces.len());
        for (k, piece) in pieces.iter().enumerate() {
            if let Some(c) = piece.point {
                anchors.push(c);
                continue;
            }
            if hits[k].is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "piece {k} ({}) has no interior samples",
                    piece.label
                )));
            }
            anchors.push(interior_anchor(piece, &hits[k]));
        }

        let bbox = match known_box {
            Some(b) => b,
            None => refined_box(&pieces, &anchors, bbox.diagonal())?,
        };

        Ok(Self {
            pieces,
            kind: DomainKind::Continuous,
            bounding_box: bbox,
            anchors,
            spec,
            piece_of: None,
        })
    }

    pub fn pieces(&self) -> &[BasicSet] {
        &self.pieces
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn is_discrete(&self) -> bool {
        self.kind == DomainKind::Discrete
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bounding_box
    }

    pub fn spec(&self) -> &DerSpec {
        &self.spec
    }

    /// Index of the source piece when this domain was produced by [`Self::piece`].
    pub fn piece_of(&self) -> Option<usize> {
        self.piece_of
    }

    /// Interior anchor of each piece (the exact point for point pieces).
    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    /// Piece `k` on its own, as a single-piece domain.
    pub fn piece(&self, k: usize) -> Result<FlexDomain> {
        let piece = self
            .pieces
            .get(k)
            .ok_or_else(|| Error::InvalidParameter(format!("no piece {k}")))?
            .clone()
            .with_cell(Vec::new());
        let rated = rated_size(&self.spec);
        let mut d = FlexDomain::assemble(vec![piece], self.spec.clone(), rated, None)?;
        d.piece_of = Some(k);
        Ok(d)
    }

    pub fn contains(&self, x: Point, tol: f64) -> bool {
        self.pieces.iter().any(|s| s.contains(x, tol))
    }

    /// Boundary points found by ray-marching from each piece's anchor.
    ///
    /// Rays are spread evenly over pieces (at least `n` in total); each ray
    /// is bisected to the piece boundary and the inner end is returned.
    pub fn sample_boundary(&self, n: usize) -> Result<Vec<Point>> {
        if self.is_discrete() {
            return Err(Error::DiscreteDomain("a discrete domain has no boundary"));
        }
        if n < 8 {
            return Err(Error::InvalidParameter(format!(
                "need at least 8 boundary samples, got {n}"
            )));
        }
        let continuous: Vec<usize> = (0..self.pieces.len())
            .filter(|&k| self.pieces[k].point.is_none())
            .collect();
        let per_piece = n.div_ceil(continuous.len());
        let reach = 2.0 * self.bounding_box.diagonal();
        let mut out = Vec::with_capacity(per_piece * continuous.len());
        for &k in &continuous {
            let piece = &self.pieces[k];
            let anchor = self.anchors[k];
            for j in 0..per_piece {
                let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / per_piece as f64;
                let dir = Point::new(theta.cos(), theta.sin());
                out.push(march(piece, anchor, dir, reach));
            }
        }
        Ok(out)
    }
}

/// Bisects the ray `anchor + t·dir`, `t ∈ [0, reach]`, to the piece boundary.
pub(crate) fn march(piece: &BasicSet, anchor: Point, dir: Point, reach: f64) -> Point {
    let (mut lo, mut hi) = (0.0, reach);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if piece.contains(anchor + dir * mid, 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    anchor + dir * lo
}

/// Box around ray-marched boundary points of every piece, padded by a
/// small margin, plus any point pieces.
fn refined_box(pieces: &[BasicSet], anchors: &[Point], coarse_diag: f64) -> Result<BoundingBox> {
    const RAYS: usize = 720;
    let reach = 2.0 * coarse_diag;
    let mut pts = Vec::new();
    for (piece, &anchor) in pieces.iter().zip(anchors) {
        if piece.point.is_some() {
            pts.push(anchor);
            continue;
        }
        for j in 0..RAYS {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / RAYS as f64;
            pts.push(march(
                piece,
                anchor,
                Point::new(theta.cos(), theta.sin()),
                reach,
            ));
        }
    }
    let b = BoundingBox::around(pts)
        .ok_or_else(|| Error::InvalidParameter("domain has no pieces".into()))?;
    let pad = 1e-3 * b.half_width().max(f64::MIN_POSITIVE);
    Ok(BoundingBox {
        p_min: b.p_min - pad,
        p_max: b.p_max + pad,
        q_min: b.q_min - pad,
        q_max: b.q_max + pad,
    })
}

fn interior_anchor(piece: &BasicSet, hits: &[Point]) -> Point {
    let n = hits.len() as f64;
    let c = hits.iter().fold(Point::ORIGIN, |acc, &x| acc + x) * (1.0 / n);
    if piece.contains(c, 0.0) {
        return c;
    }
    *hits
        .iter()
        .min_by(|a, b| (**a - c).norm().total_cmp(&(**b - c).norm()))
        .unwrap()
}

fn rated_size(spec: &DerSpec) -> f64 {
    match *spec {
        DerSpec::Battery { p_max, s } | DerSpec::Pv { p_max, s } => p_max.max(s),
        DerSpec::Wind {
            p_max,
            p0,
            q0,
            s1,
            s2,
            ..
        } => p_max.max(p0).max(q0).max(s1).max(s2),
        DerSpec::Ac { p_max, gamma } => p_max.max(gamma * p_max),
        DerSpec::Custom { scale, .. } => scale,
    }
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(what()))
    }
}

fn finite(vals: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in vals {
        check(v.is_finite(), || format!("{name} must be finite, got {v}"))?;
    }
    Ok(())
}

fn p2() -> Poly2 {
    Poly2::monomial(Monomial::new(2, 0), 1.0)
}

fn q2() -> Poly2 {
    Poly2::monomial(Monomial::new(0, 2), 1.0)
}

/// `r² − c·p² − q²`
fn ellipse(r: f64, c: f64) -> Poly2 {
    &(&Poly2::constant(r * r) - &p2().scale(c)) - &q2()
}

/// Battery: `g₁ = s² − p² − q²`, `g₂ = p_max² − p²`.
pub fn make_battery(p_max: f64, s: f64) -> Result<FlexDomain> {
    finite(&[("p_max", p_max), ("s", s)])?;
    check(p_max > 0.0, || {
        format!("p_max > 0 violated: p_max = {p_max}")
    })?;
    check(s > p_max, || {
        format!("s > p_max violated: s = {s}, p_max = {p_max}")
    })?;
    let piece = BasicSet::new(
        vec![ellipse(s, 1.0), &Poly2::constant(p_max * p_max) - &p2()],
        "battery",
    )?;
    let bbox = BoundingBox {
        p_min: -p_max,
        p_max,
        q_min: -s,
        q_max: s,
    };
    let spec = DerSpec::Battery { p_max, s };
    FlexDomain::assemble(vec![piece], spec.clone(), rated_size(&spec), Some(bbox))
}

/// PV inverter: `g₁ = s² − p² − q²`, `g₂ = −p_max·p − p²` (so `p ∈ [−p_max, 0]`).
pub fn make_pv(p_max: f64, s: f64) -> Result<FlexDomain> {
    finite(&[("p_max", p_max), ("s", s)])?;
    check(p_max > 0.0, || {
        format!("p_max > 0 violated: p_max = {p_max}")
    })?;
    check(s > p_max, || {
        format!("s > p_max violated: s = {s}, p_max = {p_max}")
    })?;
    let piece = BasicSet::new(
        vec![ellipse(s, 1.0), &Poly2::linear(-p_max, 0.0, 0.0) - &p2()],
        "pv",
    )?;
    let bbox = BoundingBox {
        p_min: -p_max,
        p_max: 0.0,
        q_min: -s,
        q_max: s,
    };
    let spec = DerSpec::Pv { p_max, s };
    FlexDomain::assemble(vec![piece], spec.clone(), rated_size(&spec), Some(bbox))
}

/// Wind inverter: a small box near the origin plus upper and lower regions
/// bounded by the stator (`s2`) and rotor (`s1`) limits.
pub fn make_wind(
    p_max: f64,
    p0: f64,
    q0: f64,
    s1: f64,
    s2: f64,
    rotor_coupling: f64,
) -> Result<FlexDomain> {
    finite(&[
        ("p_max", p_max),
        ("p0", p0),
        ("q0", q0),
        ("s1", s1),
        ("s2", s2),
        ("rotor_coupling", rotor_coupling),
    ])?;
    check(rotor_coupling > 0.0, || {
        format!("rotor_coupling > 0 violated: rotor_coupling = {rotor_coupling}")
    })?;
    check(p0 > 0.0, || format!("p0 > 0 violated: p0 = {p0}"))?;
    check(p0 < p_max, || {
        format!("p0 < p_max violated: p0 = {p0}, p_max = {p_max}")
    })?;
    check(q0 > 0.0, || format!("q0 > 0 violated: q0 = {q0}"))?;
    let root = rotor_coupling.sqrt() * p_max;
    check(s1 > root, || {
        format!("s1 > sqrt(rotor_coupling)·p_max violated: s1 = {s1}, bound = {root}")
    })?;
    check(s2 > root, || {
        format!("s2 > sqrt(rotor_coupling)·p_max violated: s2 = {s2}, bound = {root}")
    })?;
    check(q0 < s1.min(s2), || {
        format!(
            "q0 < min(s1, s2) violated: q0 = {q0}, min(s1, s2) = {}",
            s1.min(s2)
        )
    })?;

    // g₁¹ = −p² − p·p0, g₂¹ = q0² − q²
    let f1 = BasicSet::new(
        vec![
            &Poly2::linear(-p0, 0.0, 0.0) - &p2(),
            &Poly2::constant(q0 * q0) - &q2(),
        ],
        "wind/near-origin",
    )?
    .with_cell(vec![Halfplane::new(Point::new(-1.0, 0.0), p0)]);
    // g₁² = −p² − p(p0 + p_max) − p0·p_max
    let strip = &Poly2::linear(-(p0 + p_max), 0.0, -p0 * p_max) - &p2();
    let f2 = BasicSet::new(
        vec![strip.clone(), Poly2::q(), ellipse(s2, rotor_coupling)],
        "wind/stator",
    )?
    .with_cell(vec![
        Halfplane::new(Point::new(1.0, 0.0), -p0),
        Halfplane::new(Point::new(0.0, -1.0), 0.0),
    ]);
    let f3 = BasicSet::new(
        vec![strip, -&Poly2::q(), ellipse(s1, rotor_coupling)],
        "wind/rotor",
    )?
    .with_cell(vec![
        Halfplane::new(Point::new(1.0, 0.0), -p0),
        Halfplane::new(Point::new(0.0, 1.0), 0.0),
    ]);

    // q extremes: stator/rotor limits are largest at p = −p0.
    let q_top = (s2 * s2 - rotor_coupling * p0 * p0).sqrt().max(q0);
    let q_bot = (s1 * s1 - rotor_coupling * p0 * p0).sqrt().max(q0);
    let bbox = BoundingBox {
        p_min: -p_max,
        p_max: 0.0,
        q_min: -q_bot,
        q_max: q_top,
    };
    let spec = DerSpec::Wind {
        p_max,
        p0,
        q0,
        s1,
        s2,
        rotor_coupling,
    };
    FlexDomain::assemble(
        vec![f1, f2, f3],
        spec.clone(),
        rated_size(&spec),
        Some(bbox),
    )
}

/// Air-conditioner: the two operating points `(0, 0)` and `(p_max, γ·p_max)`.
pub fn make_ac(p_max: f64, gamma: f64) -> Result<FlexDomain> {
    finite(&[("p_max", p_max), ("gamma", gamma)])?;
    check(p_max > 0.0, || {
        format!("p_max > 0 violated: p_max = {p_max}")
    })?;
    check(gamma > 0.0, || {
        format!("gamma > 0 violated: gamma = {gamma}")
    })?;
    let pieces = vec![
        BasicSet::point(Point::ORIGIN, "ac/off"),
        BasicSet::point(Point::new(p_max, gamma * p_max), "ac/on"),
    ];
    let spec = DerSpec::Ac { p_max, gamma };
    FlexDomain::assemble(pieces, spec.clone(), rated_size(&spec), None)
}

fn make_custom(raw: &[CustomPiece], scale: f64) -> Result<FlexDomain> {
    check(scale.is_finite() && scale > 0.0, || {
        format!("scale > 0 violated: scale = {scale}")
    })?;
    let mut pieces = Vec::with_capacity(raw.len());
    for (k, piece) in raw.iter().enumerate() {
        pieces.push(match piece {
            CustomPiece::Point { point } => {
                check(point.is_finite(), || format!("piece {k}: non-finite point"))?;
                BasicSet::point(*point, format!("custom/{k}"))
            }
            CustomPiece::Set {
                constraints,
                label,
                cell,
            } => BasicSet::new(
                constraints.clone(),
                label.clone().unwrap_or_else(|| format!("custom/{k}")),
            )?
            .with_cell(
                cell.iter()
                    .map(|r| Halfplane::new(Point::new(r[0], r[1]), r[2]))
                    .collect(),
            ),
        });
    }
    let spec = DerSpec::Custom {
        pieces: raw.to_vec(),
        scale,
    };
    FlexDomain::assemble(pieces, spec, scale, None)
}

/// `contains(d, x, tol)`: some piece has every `g(x) >= −tol`.
pub fn contains(d: &FlexDomain, x: Point, tol: f64) -> bool {
    d.contains(x, tol)
}
