//! Minkowski aggregation of homothets and the two approximation metrics.
//!
//! Homothets of one prototype are closed under Minkowski summation:
//! `H[α₁, β₁] ⊕ H[α₂, β₂] = H[α₁ + α₂, β₁ + β₂]`. A fleet is therefore
//! aggregated by summing scalars and vectors in index order.

use std::sync::Arc;

use serde::Serialize;

use crate::domain::FlexDomain;
use crate::fit::{fit_inner, fit_outer, DegreeConfig, FitReport, InnerFitParams};
use crate::prototype::{Homothet, PrototypePolygon};
use crate::{Error, Execution, Point, Result};

/// `H[Σαᵢ, Σβᵢ]`, summed in index order.
pub fn aggregate(homothets: &[Homothet]) -> Result<Homothet> {
    let first = homothets
        .first()
        .ok_or_else(|| Error::InvalidParameter("cannot aggregate an empty list".into()))?;
    let mut alpha = 0.0;
    let mut beta = Point::ORIGIN;
    for h in homothets {
        if !first.shares_prototype(h) {
            return Err(Error::PrototypeMismatch);
        }
        alpha += h.alpha;
        beta = beta + h.beta;
    }
    Ok(Homothet::new(Arc::clone(&first.proto), alpha, beta))
}

/// `max_i ‖(ᾱ − α̲) vᵢ + β̄ − β̲‖₂` over prototype vertices.
pub fn distance_metric(outer: &Homothet, inner: &Homothet) -> Result<f64> {
    if !outer.shares_prototype(inner) {
        return Err(Error::PrototypeMismatch);
    }
    if outer.alpha < inner.alpha {
        return Err(Error::InvalidParameter(format!(
            "outer alpha {} is smaller than inner alpha {}",
            outer.alpha, inner.alpha
        )));
    }
    let da = outer.alpha - inner.alpha;
    let db = outer.beta - inner.beta;
    Ok(outer
        .proto
        .vertices()
        .iter()
        .map(|&v| (v * da + db).norm())
        .fold(0.0, f64::max))
}

/// `(α̲ / ᾱ)²`: the share of the outer area covered by the inner homothet.
pub fn area_metric(outer: &Homothet, inner: &Homothet) -> Result<f64> {
    if !outer.shares_prototype(inner) {
        return Err(Error::PrototypeMismatch);
    }
    if !(inner.alpha > 0.0 && inner.alpha <= outer.alpha) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < inner alpha <= outer alpha, got {} and {}",
            inner.alpha, outer.alpha
        )));
    }
    let r = inner.alpha / outer.alpha;
    Ok(r * r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub pi_d: f64,
    pub pi_a: f64,
}

/// Outer and (when it exists) inner approximation of one DER.
#[derive(Clone, Debug, Serialize)]
pub struct DerApprox {
    pub outer: Homothet,
    pub inner: Option<Homothet>,
}

/// Per-DER approximations and their aggregates.
#[derive(Clone, Debug, Serialize)]
pub struct FleetApprox {
    pub per_der: Vec<DerApprox>,
    pub aggregate_outer: Homothet,
    /// Sum of the inner homothets; absent when any member has none, unless
    /// `partial_inner` was requested.
    pub aggregate_inner: Option<Homothet>,
    /// The inner aggregate covers only the members that have one.
    pub partial_inner: bool,
}

impl FleetApprox {
    pub fn new(per_der: Vec<DerApprox>, partial_inner: bool) -> Result<Self> {
        let outers: Vec<Homothet> = per_der.iter().map(|d| d.outer.clone()).collect();
        let aggregate_outer = aggregate(&outers)?;
        let inners: Vec<Homothet> = per_der.iter().filter_map(|d| d.inner.clone()).collect();
        let complete = inners.len() == per_der.len();
        let aggregate_inner = if inners.is_empty() || !(complete || partial_inner) {
            None
        } else {
            let a = aggregate(&inners)?;
            if !a.shares_prototype(&aggregate_outer) {
                return Err(Error::PrototypeMismatch);
            }
            Some(a)
        };
        Ok(Self {
            per_der,
            aggregate_outer,
            partial_inner: partial_inner && !complete && aggregate_inner.is_some(),
            aggregate_inner,
        })
    }

    /// Fleet metrics between the aggregate outer and inner homothets.
    pub fn metrics(&self) -> Result<Option<Metrics>> {
        match &self.aggregate_inner {
            None => Ok(None),
            Some(inner) => Ok(Some(Metrics {
                pi_d: distance_metric(&self.aggregate_outer, inner)?,
                pi_a: area_metric(&self.aggregate_outer, inner)?,
            })),
        }
    }

    /// Recomputes the aggregates from `per_der` and compares them exactly.
    pub fn sums_consistent(&self) -> bool {
        let outers: Vec<Homothet> = self.per_der.iter().map(|d| d.outer.clone()).collect();
        let same = |a: &Homothet, b: &Homothet| a.alpha == b.alpha && a.beta == b.beta;
        let outer_ok = aggregate(&outers).is_ok_and(|a| same(&a, &self.aggregate_outer));
        let inners: Vec<Homothet> = self
            .per_der
            .iter()
            .filter_map(|d| d.inner.clone())
            .collect();
        let inner_ok = match &self.aggregate_inner {
            None => true,
            Some(agg) => aggregate(&inners).is_ok_and(|a| same(&a, agg)),
        };
        outer_ok && inner_ok
    }

    /// JSON object with the fields above plus `pi_d` and `pi_a` (null when
    /// there is no inner aggregate).
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self)
            .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
        let m = self.metrics()?;
        let obj = v.as_object_mut().expect("struct serializes to an object");
        obj.insert("pi_d".into(), m.map(|m| m.pi_d).into());
        obj.insert("pi_a".into(), m.map(|m| m.pi_a).into());
        Ok(v)
    }
}

/// Fit results for one DER.
#[derive(Clone, Debug)]
pub struct DerFit {
    pub outer: Homothet,
    /// `None` for discrete domains.
    pub inner: Option<FitReport>,
}

/// Outer fit, plus the inner fit for continuous domains.
pub fn fit_der(
    d: &FlexDomain,
    proto: &Arc<PrototypePolygon>,
    params: &InnerFitParams,
    degree: &DegreeConfig,
) -> Result<DerFit> {
    let outer = fit_outer(d, proto, degree)?;
    let inner = if d.is_discrete() {
        None
    } else {
        Some(fit_inner(d, proto, params, degree)?)
    };
    Ok(DerFit { outer, inner })
}

/// Fits every DER independently; results come back in input order.
pub fn fit_fleet(
    domains: &[FlexDomain],
    proto: &Arc<PrototypePolygon>,
    params: &InnerFitParams,
    degree: &DegreeConfig,
    exec: Execution,
) -> Vec<Result<DerFit>> {
    exec.map_slice(domains, |_, d| fit_der(d, proto, params, degree))
}

impl FleetApprox {
    pub fn from_fits(fits: &[DerFit], partial_inner: bool) -> Result<Self> {
        let per_der = fits
            .iter()
            .map(|f| DerApprox {
                outer: f.outer.clone(),
                inner: f.inner.as_ref().map(|r| r.homothet.clone()),
            })
            .collect();
        Self::new(per_der, partial_inner)
    }
}
