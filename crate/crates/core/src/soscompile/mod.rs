//! Compilation of Putinar certificates into conic programs.
//!
//! A constraint "`f − Σᵢ σᵢ gᵢ` is SOS with SOS multipliers `σᵢ`" becomes one
//! Gram matrix per SOS polynomial plus one linear equality per monomial,
//! matching the coefficients of `f` (affine in the scalar unknowns) against
//! the Gram expansions. The resulting [`ConicProgram`] has scalar variables
//! (free or non-negative), symmetric matrix variables constrained PSD, a
//! linear objective and linear equality rows, and is handed to any
//! [`ConicSolver`].

mod audit;
mod solver;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use crate::polynomial::{Monomial, MonomialBasis, Poly2};
use crate::{Error, Point, Result};

pub use audit::{audit_stats, reset_audit_stats, AuditReport, AuditStats};
pub use solver::{default_solver, ClarabelSolver, ConicSolver};

/// Largest Gram basis degree accepted by default.
pub const MAX_BASIS_DEGREE: u32 = 6;

/// Equality residual tolerance of the feasibility checker.
pub const EQ_TOL: f64 = 1e-6;
/// Minimum-eigenvalue tolerance of the feasibility checker.
pub const EIG_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRole {
    Scalar { nonneg: bool },
    Gram { basis_degree: u32, size: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecisionVar {
    pub id: VarId,
    pub role: VarRole,
}

/// A single entry of the decision vector. Gram entries are addressed in the
/// upper triangle (`row <= col`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Entry {
    Scalar(VarId),
    Gram(VarId, usize, usize),
}

impl Entry {
    pub fn var(&self) -> VarId {
        match *self {
            Entry::Scalar(v) | Entry::Gram(v, _, _) => v,
        }
    }
}

/// `Σ coef·entry = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct EqRow {
    pub terms: Vec<(Entry, f64)>,
    pub rhs: f64,
}

/// Linear objective and equality constraints over scalar and PSD matrix
/// variables; the objective is minimized.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConicProgram {
    vars: Vec<DecisionVar>,
    objective: Vec<(VarId, f64)>,
    rows: Vec<EqRow>,
    max_basis_degree: u32,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::with_basis_limit(MAX_BASIS_DEGREE)
    }

    pub fn with_basis_limit(max_basis_degree: u32) -> Self {
        Self {
            max_basis_degree,
            ..Self::default()
        }
    }

    pub fn add_scalar(&mut self, nonneg: bool) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(DecisionVar {
            id,
            role: VarRole::Scalar { nonneg },
        });
        id
    }

    pub fn add_gram(&mut self, basis_degree: u32) -> Result<VarId> {
        if basis_degree > self.max_basis_degree {
            return Err(Error::BasisTooLarge(basis_degree, self.max_basis_degree));
        }
        let id = VarId(self.vars.len());
        self.vars.push(DecisionVar {
            id,
            role: VarRole::Gram {
                basis_degree,
                size: MonomialBasis::size_for(basis_degree),
            },
        });
        Ok(id)
    }

    pub fn var(&self, id: VarId) -> Option<&DecisionVar> {
        self.vars.get(id.0)
    }

    pub fn vars(&self) -> &[DecisionVar] {
        &self.vars
    }

    pub fn rows(&self) -> &[EqRow] {
        &self.rows
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    fn check_entry(&self, e: Entry) -> Result<()> {
        let bad = || Err(Error::InvalidParameter(format!("undeclared entry {e:?}")));
        match (e, self.var(e.var()).map(|v| v.role)) {
            (Entry::Scalar(_), Some(VarRole::Scalar { .. })) => Ok(()),
            (Entry::Gram(_, r, c), Some(VarRole::Gram { size, .. })) if r <= c && c < size => {
                Ok(())
            }
            _ => bad(),
        }
    }

    /// Adds `Σ coef·entry = rhs`, merging repeated entries and dropping zeros.
    pub fn add_equality(&mut self, terms: Vec<(Entry, f64)>, rhs: f64) -> Result<()> {
        let mut merged: BTreeMap<Entry, f64> = BTreeMap::new();
        for (e, c) in terms {
            self.check_entry(e)?;
            *merged.entry(e).or_insert(0.0) += c;
        }
        self.rows.push(EqRow {
            terms: merged.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            rhs,
        });
        Ok(())
    }

    /// `a·x >= b` for scalar entries, via a fresh non-negative slack.
    pub fn add_inequality(&mut self, terms: Vec<(VarId, f64)>, lower: f64) -> Result<VarId> {
        let slack = self.add_scalar(true);
        let mut row: Vec<(Entry, f64)> = terms
            .into_iter()
            .map(|(v, c)| (Entry::Scalar(v), c))
            .collect();
        row.push((Entry::Scalar(slack), -1.0));
        self.add_equality(row, lower)?;
        Ok(slack)
    }

    pub fn minimize(&mut self, objective: Vec<(VarId, f64)>) -> Result<()> {
        for &(v, _) in &objective {
            self.check_entry(Entry::Scalar(v))?;
        }
        self.objective = objective;
        Ok(())
    }

    /// Verifies a candidate solution: every equality within [`EQ_TOL`],
    /// non-negative scalars `>= −EQ_TOL`, every Gram block with minimum
    /// eigenvalue `>= −EIG_TOL`.
    pub fn check(&self, values: &Values) -> FeasibilityReport {
        let mut max_eq: f64 = 0.0;
        for row in &self.rows {
            let lhs: f64 = row.terms.iter().map(|&(e, c)| c * values.entry(e)).sum();
            let scale = 1.0 + row.rhs.abs();
            max_eq = max_eq.max((lhs - row.rhs).abs() / scale);
        }
        let mut min_eig = f64::INFINITY;
        let mut min_nonneg = f64::INFINITY;
        for v in &self.vars {
            match v.role {
                VarRole::Gram { .. } => min_eig = min_eig.min(values.min_eigenvalue(v.id)),
                VarRole::Scalar { nonneg: true } => {
                    min_nonneg = min_nonneg.min(values.scalar(v.id))
                }
                VarRole::Scalar { nonneg: false } => {}
            }
        }
        FeasibilityReport {
            max_equality_residual: max_eq,
            min_eigenvalue: min_eig,
            feasible: max_eq <= EQ_TOL && min_eig >= -EIG_TOL && min_nonneg >= -EQ_TOL,
        }
    }

    /// JSON dump of variables, equality triplets and objective.
    pub fn to_debug_json(&self) -> serde_json::Value {
        let vars: Vec<_> = self
            .vars
            .iter()
            .map(|v| match v.role {
                VarRole::Scalar { nonneg } => json!({"id": v.id.0, "kind": "scalar", "nonneg": nonneg}),
                VarRole::Gram { basis_degree, size } => {
                    json!({"id": v.id.0, "kind": "gram", "basis_degree": basis_degree, "size": size})
                }
            })
            .collect();
        let mut triplets = Vec::new();
        for (k, row) in self.rows.iter().enumerate() {
            for &(e, c) in &row.terms {
                let (v, r, col) = match e {
                    Entry::Scalar(v) => (v, 0, 0),
                    Entry::Gram(v, r, col) => (v, r, col),
                };
                triplets.push(json!([k, v.0, r, col, c]));
            }
        }
        let rhs: Vec<f64> = self.rows.iter().map(|r| r.rhs).collect();
        let objective: Vec<_> = self
            .objective
            .iter()
            .map(|(v, c)| json!([v.0, c]))
            .collect();
        json!({
            "variables": vars,
            "equalities": triplets,
            "rhs": rhs,
            "objective": objective,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub max_equality_residual: f64,
    pub min_eigenvalue: f64,
    pub feasible: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Inaccurate,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    Matrix(DMatrix<f64>),
}

/// Solved variable values keyed by id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Values(BTreeMap<VarId, Value>);

impl Values {
    pub fn insert(&mut self, id: VarId, v: Value) {
        self.0.insert(id, v);
    }

    pub fn get(&self, id: VarId) -> Option<&Value> {
        self.0.get(&id)
    }

    pub fn scalar(&self, id: VarId) -> f64 {
        match self.0.get(&id) {
            Some(Value::Scalar(x)) => *x,
            _ => f64::NAN,
        }
    }

    pub fn matrix(&self, id: VarId) -> Option<&DMatrix<f64>> {
        match self.0.get(&id) {
            Some(Value::Matrix(m)) => Some(m),
            _ => None,
        }
    }

    fn entry(&self, e: Entry) -> f64 {
        match e {
            Entry::Scalar(v) => self.scalar(v),
            Entry::Gram(v, r, c) => self.matrix(v).map_or(f64::NAN, |m| m[(r, c)]),
        }
    }

    pub fn min_eigenvalue(&self, id: VarId) -> f64 {
        self.matrix(id).map_or(f64::NAN, |m| {
            m.clone()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        })
    }
}

/// Result of one solver call. `values` is populated only for `Optimal` and
/// `Inaccurate`.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub values: Option<Values>,
    pub objective_value: f64,
}

impl SolveOutcome {
    pub fn failed(status: SolveStatus) -> Self {
        Self {
            status,
            values: None,
            objective_value: f64::NAN,
        }
    }

    pub fn has_values(&self) -> bool {
        self.values.is_some()
    }
}

/// Solves with the default solver.
pub fn solve(prog: &ConicProgram) -> SolveOutcome {
    default_solver().solve(prog)
}

/// `constant + Σ coef·var` over scalar decision variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub constant: f64,
    pub coeffs: BTreeMap<VarId, f64>,
}

impl LinExpr {
    pub fn eval(&self, values: &Values) -> f64 {
        self.constant
            + self
                .coeffs
                .iter()
                .map(|(&v, c)| c * values.scalar(v))
                .sum::<f64>()
    }
}

/// Polynomial in `(p, q)` whose coefficients are affine in scalar decision
/// variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffinePoly {
    terms: BTreeMap<Monomial, LinExpr>,
}

impl AffinePoly {
    pub fn from_poly(p: &Poly2) -> Self {
        let mut out = Self::default();
        for (m, c) in p.terms() {
            out.add_constant(m, c);
        }
        out
    }

    pub fn add_constant(&mut self, m: Monomial, c: f64) -> &mut Self {
        self.terms.entry(m).or_default().constant += c;
        self
    }

    pub fn add_var(&mut self, m: Monomial, var: VarId, c: f64) -> &mut Self {
        *self
            .terms
            .entry(m)
            .or_default()
            .coeffs
            .entry(var)
            .or_insert(0.0) += c;
        self
    }

    pub fn degree(&self) -> i32 {
        self.terms
            .keys()
            .map(|m| m.degree() as i32)
            .max()
            .unwrap_or(-1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &LinExpr)> {
        self.terms.iter()
    }

    /// The plain polynomial obtained by substituting solved scalars.
    pub fn substitute(&self, values: &Values) -> Poly2 {
        Poly2::from_terms(self.terms.iter().map(|(&m, e)| (m, e.eval(values))))
    }
}

/// Handle to a compiled SOS constraint `target − Σ σᵢ gᵢ ∈ Σ[p, q]`.
#[derive(Clone, Debug)]
pub struct SosBlock {
    pub target: AffinePoly,
    pub residual: (VarId, MonomialBasis),
    pub multipliers: Vec<Multiplier>,
}

#[derive(Clone, Debug)]
pub struct Multiplier {
    pub g: Poly2,
    pub gram: VarId,
    pub basis: MonomialBasis,
}

impl SosBlock {
    /// The Gram-reconstructed SOS polynomials: residual and each `σᵢ`.
    pub fn sos_polynomials(&self, values: &Values) -> (Poly2, Vec<Poly2>) {
        let gram_poly = |id: VarId, basis: &MonomialBasis| {
            let m = values.matrix(id).expect("gram value");
            let n = basis.len();
            let flat: Vec<f64> = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
            basis.gram_polynomial(&flat)
        };
        let residual = gram_poly(self.residual.0, &self.residual.1);
        let sigmas = self
            .multipliers
            .iter()
            .map(|mu| gram_poly(mu.gram, &mu.basis))
            .collect();
        (residual, sigmas)
    }

    /// `f − Σ σᵢ gᵢ` with `f` and `σᵢ` taken from the solution.
    pub fn certificate_residual(&self, values: &Values) -> Poly2 {
        let (_, sigmas) = self.sos_polynomials(values);
        let f = self.target.substitute(values);
        sigmas
            .iter()
            .zip(&self.multipliers)
            .fold(f, |acc, (s, mu)| &acc - &(s * &mu.g))
    }

    /// Checks the certificate at `samples` and every Gram block's spectrum.
    pub fn audit(&self, values: &Values, samples: &[Point]) -> AuditReport {
        let residual = self.certificate_residual(values);
        let min_residual = samples
            .iter()
            .map(|&x| residual.eval(x))
            .fold(f64::INFINITY, f64::min);
        let min_eigenvalue = std::iter::once(self.residual.0)
            .chain(self.multipliers.iter().map(|m| m.gram))
            .map(|id| values.min_eigenvalue(id))
            .fold(f64::INFINITY, f64::min);
        AuditReport::new(min_residual, min_eigenvalue)
    }
}

/// Degree of an SOS multiplier for constraint `g` at certificate degree
/// `cert_degree`: the largest even number with `deg σ + deg g <= cert_degree`.
pub fn multiplier_degree(cert_degree: u32, g: &Poly2) -> u32 {
    let dg = g.degree().max(0) as u32;
    let room = cert_degree.saturating_sub(dg);
    room - room % 2
}

/// Default certificate degree: max constraint degree rounded up to even,
/// plus two.
pub fn default_certificate_degree<'a>(gs: impl IntoIterator<Item = &'a Poly2>) -> u32 {
    let d = gs
        .into_iter()
        .map(|g| g.degree().max(0) as u32)
        .max()
        .unwrap_or(0);
    d + d % 2 + 2
}

/// Compiles `target − Σᵢ σᵢ gᵢ ∈ Σ[p, q]` into `prog`.
///
/// One Gram variable is introduced for the residual (basis degree
/// `cert_degree / 2`) and one per multiplier (basis degree
/// `sigma_degree / 2`); one equality row is emitted per monomial.
pub fn sos_constraint(
    prog: &mut ConicProgram,
    target: &AffinePoly,
    multipliers: &[(Poly2, u32)],
    cert_degree: u32,
) -> Result<SosBlock> {
    if !cert_degree.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "certificate degree must be even, got {cert_degree}"
        )));
    }
    if let Some((&m, _)) = target.terms().find(|(m, _)| m.degree() > cert_degree) {
        return Err(Error::DegreeMismatch {
            monomial: m,
            degree: cert_degree,
        });
    }
    for (g, sd) in multipliers {
        if sd % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "multiplier degree must be even, got {sd}"
            )));
        }
        if let Some((m, _)) = g.terms().find(|(m, _)| m.degree() + sd > cert_degree) {
            return Err(Error::DegreeMismatch {
                monomial: m,
                degree: cert_degree,
            });
        }
    }

    let residual_basis = MonomialBasis::new(cert_degree / 2);
    let residual_var = prog.add_gram(residual_basis.max_degree())?;
    let mut rows: BTreeMap<Monomial, Vec<(Entry, f64)>> = BTreeMap::new();
    for (m, hits) in residual_basis.gram_expand() {
        let row = rows.entry(m).or_default();
        for (r, c) in hits {
            row.push((
                Entry::Gram(residual_var, r, c),
                if r == c { 1.0 } else { 2.0 },
            ));
        }
    }

    let mut mults = Vec::with_capacity(multipliers.len());
    for (g, sd) in multipliers {
        let basis = MonomialBasis::new(sd / 2);
        let gram = prog.add_gram(basis.max_degree())?;
        for (ms, hits) in basis.gram_expand() {
            for (mg, cg) in g.terms() {
                let row = rows.entry(ms * mg).or_default();
                for &(r, c) in &hits {
                    let w = if r == c { 1.0 } else { 2.0 };
                    row.push((Entry::Gram(gram, r, c), w * cg));
                }
            }
        }
        mults.push(Multiplier {
            g: g.clone(),
            gram,
            basis,
        });
    }

    for (m, _) in target.terms() {
        rows.entry(*m).or_default();
    }
    for (m, mut row) in rows {
        let rhs = match target.terms.get(&m) {
            Some(e) => {
                for (&v, &c) in &e.coeffs {
                    row.push((Entry::Scalar(v), -c));
                }
                e.constant
            }
            None => 0.0,
        };
        prog.add_equality(row, rhs)?;
    }

    Ok(SosBlock {
        target: target.clone(),
        residual: (residual_var, residual_basis),
        multipliers: mults,
    })
}
