use serde::{Deserialize, Serialize};

use super::quadratic::QuadraticSolver;
use super::shrink::shrink_in_place;
use crate::error::{Error, Result};
use crate::fourier::{operator_symbol, Fft2, FourierSymbol};
use crate::grid::{Field, ImageGrid};
use crate::ops;

/// Iterates whose norm exceeds this multiple of `max(‖f‖, 1)` abort the run.
const BLOWUP_FACTOR: f64 = 1e6;

/// Which total-variation term a solver (or a stage) minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularizer {
    /// `φ(Du)`, the ROF model.
    FirstOrder,
    /// `φ(DDu)`, the LLT model.
    SecondOrder,
}

impl Regularizer {
    /// Switching-function value: 1 for first order, 2 for second order.
    pub fn tag(self) -> u8 {
        match self {
            Regularizer::FirstOrder => 1,
            Regularizer::SecondOrder => 2,
        }
    }

    /// Regularizer of stage `n` (1-based): odd stages are first order.
    pub fn for_stage(n: usize) -> Self {
        if n % 2 == 1 {
            Regularizer::FirstOrder
        } else {
            Regularizer::SecondOrder
        }
    }

    pub fn other(self) -> Self {
        match self {
            Regularizer::FirstOrder => Regularizer::SecondOrder,
            Regularizer::SecondOrder => Regularizer::FirstOrder,
        }
    }
}

/// Parameters of one ADMM run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    /// Regularization weight λ.
    pub lambda: f64,
    /// Augmented-Lagrangian penalty (ρ for ROF, β for LLT).
    pub penalty: f64,
    /// Stop once `‖u^{k+1} − u^k‖ / ‖u^k‖` drops below this.
    pub tol: f64,
    pub max_inner_iters: usize,
    /// Reserved. Carried through configs and outputs but not used by any
    /// update; its role in the method is unresolved.
    pub alpha: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            penalty: 2.0,
            tol: 1e-8,
            max_inner_iters: 200,
            alpha: 0.618,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("penalty", self.penalty)?;
        positive("tol", self.tol)?;
        if self.max_inner_iters == 0 {
            return Err(Error::Config("max_inner_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Diagnostics of one inner iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    /// 1-based iteration number.
    pub k: usize,
    /// `‖u^k − u^{k−1}‖ / ‖u^{k−1}‖`.
    pub rel_change: f64,
    /// `‖K u^k − f‖₂`.
    pub data_residual: f64,
    /// `‖v^k − L u^k‖₂`.
    pub primal_residual: f64,
    /// Model objective at `u^k`.
    pub objective: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InnerTrace {
    records: Vec<IterRecord>,
}

impl InnerTrace {
    pub fn records(&self) -> &[IterRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first(&self) -> Option<&IterRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&IterRecord> {
        self.records.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = &IterRecord> {
        self.records.iter()
    }
}

/// Which iterates a run keeps besides the final one.
pub enum Retention<'a> {
    FinalOnly,
    All,
    /// Keep the highest-scoring iterate; ties go to the earliest.
    Best(&'a dyn Fn(&ImageGrid) -> f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IterateStore {
    None,
    /// `u^1, u^2, …` in order (the initial guess is not included).
    All(Vec<ImageGrid>),
    Best {
        /// 1-based iteration of the kept iterate.
        k: usize,
        score: f64,
        image: ImageGrid,
    },
}

impl IterateStore {
    pub fn all(&self) -> Option<&[ImageGrid]> {
        match self {
            IterateStore::All(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_all(self) -> Option<Vec<ImageGrid>> {
        match self {
            IterateStore::All(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdmmOutput {
    pub u: ImageGrid,
    pub trace: InnerTrace,
    pub iterates: IterateStore,
    /// True when the relative-change tolerance stopped the run.
    pub converged: bool,
}

/// A splitting operator `L` with `C` output channels.
trait Splitting<const C: usize> {
    fn apply(u: &ImageGrid) -> Field<C>;
    fn adjoint(p: &Field<C>) -> ImageGrid;
    fn channel_ops() -> [fn(&ImageGrid) -> ImageGrid; C];
}

struct Gradient;
struct Hessian;

impl Splitting<2> for Gradient {
    fn apply(u: &ImageGrid) -> Field<2> {
        ops::grad(u)
    }
    fn adjoint(p: &Field<2>) -> ImageGrid {
        ops::grad_adjoint(p)
    }
    fn channel_ops() -> [fn(&ImageGrid) -> ImageGrid; 2] {
        [ops::forward_diff_x, ops::forward_diff_y]
    }
}

impl Splitting<4> for Hessian {
    fn apply(u: &ImageGrid) -> Field<4> {
        ops::hessian(u)
    }
    fn adjoint(q: &Field<4>) -> ImageGrid {
        ops::hessian_adjoint(q)
    }
    fn channel_ops() -> [fn(&ImageGrid) -> ImageGrid; 4] {
        [
            |u| ops::backward_diff_x(&ops::forward_diff_x(u)),
            |u| ops::forward_diff_y(&ops::forward_diff_x(u)),
            |u| ops::forward_diff_x(&ops::forward_diff_y(u)),
            |u| ops::backward_diff_y(&ops::forward_diff_y(u)),
        ]
    }
}

fn rel_change(next: &ImageGrid, prev: &ImageGrid) -> f64 {
    let diff = next.distance(prev);
    let base = prev.norm();
    if base > 0.0 {
        diff / base
    } else {
        // Zero previous iterate: fall back to the absolute change.
        diff
    }
}

/// ADMM on `½‖Ku − f‖² + λ φ(Lu)` split as `v = Lu`.
///
/// Augmented Lagrangian `… − ⟨μ, v − Lu⟩ + (β/2)‖v − Lu‖²`, so each sweep is
///
/// ```text
/// (KᵀK + β LᵀL) u⁺ = Kᵀf + β Lᵀv − Lᵀμ
/// v⁺ = shrink(L u⁺ + μ/β, λ/β)
/// μ⁺ = μ − β (v⁺ − L u⁺)
/// ```
///
/// starting from `v = 0`, `μ = 0`.
fn run<S: Splitting<C>, const C: usize>(
    f: &ImageGrid,
    sym_k: &FourierSymbol,
    cfg: &AdmmConfig,
    u0: &ImageGrid,
    retention: Retention<'_>,
) -> Result<AdmmOutput> {
    cfg.validate()?;
    f.check_conformable(u0)?;
    if sym_k.shape() != f.shape() {
        return Err(Error::Shape {
            expected: f.shape(),
            actual: sym_k.shape(),
        });
    }
    let (rows, cols) = f.shape();
    let beta = cfg.penalty;
    let threshold = cfg.lambda / beta;

    let sym_l = S::channel_ops().map(|op| operator_symbol(op, rows, cols));
    let solver = QuadraticSolver::new(sym_k, &sym_l, beta)?;
    let fft: &Fft2 = solver.fft();
    let kt_f = sym_k.apply_adjoint_with(fft, f);
    let blowup = BLOWUP_FACTOR * f.norm().max(1.0);

    let mut v = Field::<C>::zeros(rows, cols);
    let mut mu = Field::<C>::zeros(rows, cols);
    let mut u = u0.clone();
    let mut trace = InnerTrace::default();
    let mut kept = Vec::new();
    let mut best: Option<(usize, f64, ImageGrid)> = None;
    let mut converged = false;

    for k in 1..=cfg.max_inner_iters {
        let pull = v.zip_map(&mu, |vi, mi| beta * vi - mi);
        let rhs = &kt_f + &S::adjoint(&pull);
        let u_next = solver.solve(&rhs)?;

        let lu = S::apply(&u_next);
        let mut x = lu.zip_map(&mu, |l, m| l + m / beta);
        shrink_in_place(&mut x, threshold);
        v = x;
        mu = mu.zip_map(&v.zip_map(&lu, |a, b| a - b), |m, d| m - beta * d);

        let norm = u_next.norm();
        if !u_next.all_finite() || !norm.is_finite() {
            return Err(Error::Divergence {
                iteration: k,
                reason: "non-finite iterate".into(),
            });
        }
        if norm > blowup {
            return Err(Error::Divergence {
                iteration: k,
                reason: format!("‖u‖ = {norm:e} exceeds {blowup:e}"),
            });
        }

        let residual = sym_k.apply_with(fft, &u_next).distance(f);
        let record = IterRecord {
            k,
            rel_change: rel_change(&u_next, &u),
            data_residual: residual,
            primal_residual: v.distance(&lu),
            objective: 0.5 * residual * residual + cfg.lambda * lu.l1_of_l2(),
        };
        if !(record.rel_change.is_finite() && record.primal_residual.is_finite() && record.objective.is_finite()) {
            return Err(Error::Divergence {
                iteration: k,
                reason: "non-finite diagnostics".into(),
            });
        }
        trace.records.push(record);

        match &retention {
            Retention::FinalOnly => {}
            Retention::All => kept.push(u_next.clone()),
            Retention::Best(score) => {
                let s = score(&u_next);
                if best.as_ref().is_none_or(|(_, b, _)| s > *b) {
                    best = Some((k, s, u_next.clone()));
                }
            }
        }

        u = u_next;
        if record.rel_change < cfg.tol {
            converged = true;
            break;
        }
    }

    let iterates = match retention {
        Retention::FinalOnly => IterateStore::None,
        Retention::All => IterateStore::All(kept),
        Retention::Best(_) => {
            let (k, score, image) = best.expect("at least one iteration runs");
            IterateStore::Best { k, score, image }
        }
    };
    Ok(AdmmOutput {
        u,
        trace,
        iterates,
        converged,
    })
}

/// ADMM for the first-order TV (ROF) model with threshold `λ/ρ`.
pub fn admm_rof(
    f: &ImageGrid,
    sym_k: &FourierSymbol,
    cfg: &AdmmConfig,
    u0: &ImageGrid,
    retention: Retention<'_>,
) -> Result<AdmmOutput> {
    run::<Gradient, 2>(f, sym_k, cfg, u0, retention)
}

/// ADMM for the second-order TV (LLT) model with threshold `λ/β`.
pub fn admm_llt(
    f: &ImageGrid,
    sym_k: &FourierSymbol,
    cfg: &AdmmConfig,
    u0: &ImageGrid,
    retention: Retention<'_>,
) -> Result<AdmmOutput> {
    run::<Hessian, 4>(f, sym_k, cfg, u0, retention)
}

impl Regularizer {
    /// Run the matching ADMM solver.
    pub fn solve(
        self,
        f: &ImageGrid,
        sym_k: &FourierSymbol,
        cfg: &AdmmConfig,
        u0: &ImageGrid,
        retention: Retention<'_>,
    ) -> Result<AdmmOutput> {
        match self {
            Regularizer::FirstOrder => admm_rof(f, sym_k, cfg, u0, retention),
            Regularizer::SecondOrder => admm_llt(f, sym_k, cfg, u0, retention),
        }
    }

    pub fn objective(self, u: &ImageGrid, f: &ImageGrid, sym_k: &FourierSymbol, lambda: f64) -> Result<f64> {
        match self {
            Regularizer::FirstOrder => super::objective_rof(u, f, sym_k, lambda),
            Regularizer::SecondOrder => super::objective_llt(u, f, sym_k, lambda),
        }
    }
}
