//! Stage-wise alternation of the first- and second-order TV solvers.
//!
//! Stage `N` runs the ROF solver for odd `N` and the LLT solver for even `N`.
//! Each stage restarts from the image selected in the previous stage: that
//! image is both the initial guess and the data term of the stage's model
//! (stage 1 starts from the observation `f`). Within a stage every iterate is
//! stored and a semi-convergence rule picks the one to propagate. All
//! residuals are measured against the original observation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Fft2, FourierSymbol};
use crate::grid::ImageGrid;
use crate::metrics;
use crate::solvers::{AdmmConfig, IterRecord, Regularizer, Retention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// Stop before the first increase of `‖Ku − f‖`; needs no ground truth.
    BlindResidual,
    /// Highest PSNR against a reference image.
    OraclePsnr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagewiseConfig {
    /// Weight of the first-order (odd) stages.
    pub lambda1: f64,
    /// Weight of the second-order (even) stages.
    pub lambda2: f64,
    pub penalty: f64,
    pub tol: f64,
    pub max_inner_iters: usize,
    pub n_max: usize,
    /// Reserved, see [`AdmmConfig::alpha`].
    pub alpha: f64,
    pub mode: SelectionMode,
    /// Ground truth; present exactly when `mode` is [`SelectionMode::OraclePsnr`].
    pub oracle: Option<ImageGrid>,
}

impl Default for StagewiseConfig {
    fn default() -> Self {
        let inner = AdmmConfig::default();
        Self {
            lambda1: inner.lambda,
            lambda2: inner.lambda,
            penalty: inner.penalty,
            tol: inner.tol,
            max_inner_iters: inner.max_inner_iters,
            n_max: 12,
            alpha: inner.alpha,
            mode: SelectionMode::BlindResidual,
            oracle: None,
        }
    }
}

impl StagewiseConfig {
    /// Defaults with PSNR selection against `reference`.
    pub fn oracle(reference: ImageGrid) -> Self {
        Self {
            mode: SelectionMode::OraclePsnr,
            oracle: Some(reference),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.mode, &self.oracle) {
            (SelectionMode::OraclePsnr, None) => {
                return Err(Error::Config("oracle-psnr selection needs a reference image".into()))
            }
            (SelectionMode::BlindResidual, Some(_)) => {
                return Err(Error::Config("a reference image implies oracle-psnr selection".into()))
            }
            _ => {}
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        self.stage_config(Regularizer::FirstOrder).validate()?;
        self.stage_config(Regularizer::SecondOrder).validate()
    }

    /// Inner solver settings for a stage of the given order.
    pub fn stage_config(&self, order: Regularizer) -> AdmmConfig {
        AdmmConfig {
            lambda: match order {
                Regularizer::FirstOrder => self.lambda1,
                Regularizer::SecondOrder => self.lambda2,
            },
            penalty: self.penalty,
            tol: self.tol,
            max_inner_iters: self.max_inner_iters,
            alpha: self.alpha,
        }
    }
}

/// Outcome of one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// 1-based stage number.
    pub stage: usize,
    pub regularizer: Regularizer,
    /// Inner iterations the solver ran.
    pub inner_iters: usize,
    /// 1-based inner iteration picked by the selection rule.
    pub candidate: usize,
    /// Residual (blind) or PSNR (oracle) of the candidate.
    pub candidate_score: f64,
    /// Iterate propagated to the next stage: the candidate when it improves
    /// on the stage input, otherwise 0, the input itself.
    pub selected: usize,
    /// Score of the propagated image.
    pub score: f64,
    /// Score of the image the stage started from.
    pub input_score: f64,
    pub progressed: bool,
    /// Relative change at the first inner iteration.
    pub entry_rel_err: f64,
    /// Relative change at the candidate.
    pub exit_rel_err: f64,
}

/// One inner iteration as it appears in the restoration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub stage: usize,
    pub regularizer: Regularizer,
    /// The solver's own record; its residual is against the stage's data.
    pub record: IterRecord,
    /// `‖Ku − f‖₂` against the original observation.
    pub residual: f64,
    /// Against the oracle, when there is one.
    pub psnr: Option<f64>,
    /// Against the oracle, when there is one and the image fits the window.
    pub ssim: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// All `n_max` stages ran.
    MaxStages,
    /// Two consecutive stages failed to improve on their input.
    NoProgress,
    /// The first stage met the inner tolerance on its first iteration: the
    /// observation is already a fixed point.
    Converged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestoreResult {
    pub image: ImageGrid,
    pub stages: Vec<StageRecord>,
    /// Per stage, the inner iterations `1..=selected` leading to the
    /// propagated image.
    pub trace: Vec<TraceEntry>,
    pub termination: Termination,
}

impl RestoreResult {
    pub fn total_inner_iters(&self) -> usize {
        self.stages.iter().map(|s| s.inner_iters).sum()
    }
}

/// Index and score picked by [`semiconv_select`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    /// 0-based position in the iterate sequence.
    pub index: usize,
    pub score: f64,
}

/// Position just before the first strict increase, or the last position.
pub fn first_rise(values: &[f64]) -> Option<usize> {
    if values.is_empty() {
        return None;
    }
    Some(
        values
            .windows(2)
            .position(|w| w[1] > w[0])
            .unwrap_or(values.len() - 1),
    )
}

/// Position of the maximum; ties go to the earliest.
pub fn first_argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

fn residuals(iterates: &[ImageGrid], f: &ImageGrid, sym_k: &FourierSymbol) -> Result<Vec<f64>> {
    let fft = Fft2::new(f.rows(), f.cols());
    iterates
        .iter()
        .map(|u| {
            f.check_conformable(u)?;
            Ok(sym_k.apply_with(&fft, u).distance(f))
        })
        .collect()
}

fn psnrs(iterates: &[ImageGrid], oracle: &ImageGrid) -> Result<Vec<f64>> {
    iterates.iter().map(|u| metrics::psnr(u, oracle)).collect()
}

/// Pick the locally optimal iterate of a stage.
///
/// Blind mode returns the iterate just before `‖Ku − f‖₂` first increases
/// (the last one if it never does); oracle mode returns the first PSNR
/// maximum.
pub fn semiconv_select(
    iterates: &[ImageGrid],
    f: &ImageGrid,
    sym_k: &FourierSymbol,
    mode: SelectionMode,
    oracle: Option<&ImageGrid>,
) -> Result<Selection> {
    if iterates.is_empty() {
        return Err(Error::domain("no iterates to select from"));
    }
    let (scores, index) = match mode {
        SelectionMode::BlindResidual => {
            let r = residuals(iterates, f, sym_k)?;
            let i = first_rise(&r);
            (r, i)
        }
        SelectionMode::OraclePsnr => {
            let oracle = oracle.ok_or_else(|| Error::Config("oracle-psnr selection needs a reference image".into()))?;
            let p = psnrs(iterates, oracle)?;
            let i = first_argmax(&p);
            (p, i)
        }
    };
    let index = index.expect("nonempty");
    Ok(Selection {
        index,
        score: scores[index],
    })
}

/// Whether `candidate` strictly beats `incumbent` under `mode`.
fn improves(mode: SelectionMode, candidate: f64, incumbent: f64) -> bool {
    match mode {
        SelectionMode::BlindResidual => candidate < incumbent,
        SelectionMode::OraclePsnr => candidate > incumbent,
    }
}

/// Alternate ROF and LLT stages starting with ROF.
pub fn run_stagewise(f: &ImageGrid, sym_k: &FourierSymbol, cfg: &StagewiseConfig) -> Result<RestoreResult> {
    run_schedule(f, sym_k, cfg, Regularizer::FirstOrder)
}

/// One stage of a single model followed by selection: the `rof` / `llt`
/// restoration methods. Identical to [`run_stagewise`] with `n_max = 1`
/// when `order` is first order.
pub fn run_single(f: &ImageGrid, sym_k: &FourierSymbol, order: Regularizer, cfg: &StagewiseConfig) -> Result<RestoreResult> {
    let cfg = StagewiseConfig {
        n_max: 1,
        ..cfg.clone()
    };
    run_schedule(f, sym_k, &cfg, order)
}

fn run_schedule(
    f: &ImageGrid,
    sym_k: &FourierSymbol,
    cfg: &StagewiseConfig,
    first: Regularizer,
) -> Result<RestoreResult> {
    cfg.validate()?;
    if !f.all_finite() {
        return Err(Error::domain("observation has non-finite values"));
    }
    if sym_k.shape() != f.shape() {
        return Err(Error::Shape {
            expected: f.shape(),
            actual: sym_k.shape(),
        });
    }
    let oracle = cfg.oracle.as_ref();
    if let Some(o) = oracle {
        f.check_conformable(o)?;
    }
    let fft = Fft2::new(f.rows(), f.cols());
    let score_all = |iterates: &[ImageGrid]| -> Result<Vec<f64>> {
        match cfg.mode {
            SelectionMode::BlindResidual => residuals(iterates, f, sym_k),
            SelectionMode::OraclePsnr => psnrs(iterates, oracle.expect("validated")),
        }
    };

    let mut current = f.clone();
    let mut current_score = score_all(std::slice::from_ref(&current))?[0];
    let mut stages = Vec::new();
    let mut trace = Vec::new();
    let mut stalled = 0usize;
    let mut termination = Termination::MaxStages;

    for n in 1..=cfg.n_max {
        let order = if n % 2 == 1 { first } else { first.other() };
        let inner = cfg.stage_config(order);
        let out = order.solve(&current, sym_k, &inner, &current, Retention::All)?;
        let records = out.trace.records().to_vec();
        let iterates = out.iterates.into_all().expect("all iterates retained");

        let scores = score_all(&iterates)?;
        let index = match cfg.mode {
            SelectionMode::BlindResidual => first_rise(&scores),
            SelectionMode::OraclePsnr => first_argmax(&scores),
        }
        .expect("solver ran at least once");

        // In blind mode the observation trivially fits itself, so the first
        // stage is never compared against it.
        let progressed = (n == 1 && cfg.mode == SelectionMode::BlindResidual)
            || improves(cfg.mode, scores[index], current_score);

        let selected = if progressed { index + 1 } else { 0 };
        for (k, record) in records.iter().take(selected).enumerate() {
            let (psnr, ssim) = match oracle {
                Some(o) => {
                    let p = match cfg.mode {
                        SelectionMode::OraclePsnr => scores[k],
                        SelectionMode::BlindResidual => metrics::psnr(&iterates[k], o)?,
                    };
                    (Some(p), metrics::ssim(&iterates[k], o).ok())
                }
                None => (None, None),
            };
            let residual = match cfg.mode {
                SelectionMode::BlindResidual => scores[k],
                SelectionMode::OraclePsnr => sym_k.apply_with(&fft, &iterates[k]).distance(f),
            };
            trace.push(TraceEntry {
                stage: n,
                regularizer: order,
                record: *record,
                residual,
                psnr,
                ssim,
            });
        }

        let input_score = current_score;
        if progressed {
            current = iterates.into_iter().nth(index).expect("index in range");
            current_score = scores[index];
            stalled = 0;
        } else {
            stalled += 1;
        }
        stages.push(StageRecord {
            stage: n,
            regularizer: order,
            inner_iters: records.len(),
            candidate: index + 1,
            candidate_score: scores[index],
            selected,
            score: current_score,
            input_score,
            progressed,
            entry_rel_err: records[0].rel_change,
            exit_rel_err: records[index].rel_change,
        });

        if n == 1 && out.converged && records.len() == 1 {
            termination = Termination::Converged;
            break;
        }
        if stalled >= 2 {
            termination = Termination::NoProgress;
            break;
        }
    }

    Ok(RestoreResult {
        image: current,
        stages,
        trace,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_rise_examples() {
        assert_eq!(first_rise(&[5.0, 4.0, 3.0, 3.5, 2.0]), Some(2));
        assert_eq!(first_rise(&[5.0, 4.0, 3.0, 2.0]), Some(3));
        assert_eq!(first_rise(&[1.0]), Some(0));
        assert_eq!(first_rise(&[2.0, 2.0, 2.0]), Some(2));
        assert_eq!(first_rise(&[]), None);
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(first_argmax(&[20.0, 25.0, 24.0]), Some(1));
        assert_eq!(first_argmax(&[3.0, 7.0, 7.0]), Some(1));
        assert_eq!(first_argmax(&[]), None);
    }

    #[test]
    fn config_invariants() {
        let mut cfg = StagewiseConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.mode = SelectionMode::OraclePsnr;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = StagewiseConfig::oracle(ImageGrid::zeros(4, 4));
        assert!(cfg.validate().is_ok());
        cfg.mode = SelectionMode::BlindResidual;
        assert!(cfg.validate().is_err());
        let cfg = StagewiseConfig {
            n_max: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn select_needs_iterates_and_oracle() {
        let f = ImageGrid::zeros(4, 4);
        let k = FourierSymbol::identity(4, 4);
        assert!(semiconv_select(&[], &f, &k, SelectionMode::BlindResidual, None).is_err());
        assert!(matches!(
            semiconv_select(&[f.clone()], &f, &k, SelectionMode::OraclePsnr, None),
            Err(Error::Config(_))
        ));
    }
}
