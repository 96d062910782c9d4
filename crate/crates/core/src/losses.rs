//! Multiclass hinge losses for the inductive, universum and semi-supervised
//! settings, and the unified loss that covers both unlabeled regimes.
//!
//! Class labels are 0-based indices `0..classes` throughout the crate.
//! Every loss returns a sum over samples; callers normalize by batch size.

use crate::error::{Error, Result};
use crate::tensor::{Axis, Matrix, Tape, Tensor};

/// Labeled samples `(x_i, y_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledBatch {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl LabeledBatch {
    pub fn new(features: Matrix, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::Domain(format!("need at least 2 classes, got {classes}")));
        }
        if labels.len() != features.rows() {
            return Err(Error::shape(
                "LabeledBatch",
                format!("{} labels for {} rows", labels.len(), features.rows()),
            ));
        }
        check_labels(&labels, classes)?;
        Ok(LabeledBatch {
            features,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Unlabeled samples `x*`; universum or compliant depending on the setting.
#[derive(Clone, Debug, PartialEq)]
pub struct UnlabeledBatch {
    pub features: Matrix,
}

impl UnlabeledBatch {
    pub fn new(features: Matrix) -> Self {
        UnlabeledBatch { features }
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Outer clipping applied to each transformed sample's margin violation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiKind {
    /// `psi(x) = x`; the universum regime (`eps < 0`).
    Identity,
    /// `psi(x) = min(x, eps)`; the semi-supervised regime (`eps = 1`).
    MinWithEps,
}

impl PsiKind {
    /// The clipping that goes with a given `eps`. Only `eps < 0` and
    /// `eps == 1` are meaningful.
    pub fn for_eps(eps: f64) -> Result<Self> {
        if eps < 0.0 {
            Ok(PsiKind::Identity)
        } else if eps == 1.0 {
            Ok(PsiKind::MinWithEps)
        } else {
            Err(Error::Domain(format!(
                "eps must be negative (universum) or exactly 1 (semi-supervised), got {eps}"
            )))
        }
    }
}

/// Label/origin bookkeeping of the unlabeled-data expansion: every source row
/// appears once per class, rows grouped by origin.
#[derive(Clone, Debug, PartialEq)]
pub struct UnifiedLayout {
    pub labels: Vec<usize>,
    pub origin: Vec<usize>,
    pub eps: f64,
    pub psi: PsiKind,
    pub classes: usize,
}

impl UnifiedLayout {
    pub fn new(sources: usize, classes: usize, eps: f64) -> Result<Self> {
        if classes < 2 {
            return Err(Error::Domain(format!("need at least 2 classes, got {classes}")));
        }
        let psi = PsiKind::for_eps(eps)?;
        let mut labels = Vec::with_capacity(sources * classes);
        let mut origin = Vec::with_capacity(sources * classes);
        for src in 0..sources {
            for class in 0..classes {
                labels.push(class);
                origin.push(src);
            }
        }
        Ok(UnifiedLayout {
            labels,
            origin,
            eps,
            psi,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Repeats the rows of per-source scores (`m x L`) into the expanded
    /// layout (`mL x L`) without re-running the model on copies.
    pub fn expand_scores<'t>(&self, source_scores: Tensor<'t>) -> Result<Tensor<'t>> {
        source_scores.gather_rows(&self.origin)
    }
}

/// Unlabeled batch expanded into `L` pseudo-labeled copies per row.
#[derive(Clone, Debug, PartialEq)]
pub struct UnifiedBatch {
    pub features: Matrix,
    pub layout: UnifiedLayout,
}

/// Learning setting for the unlabeled term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Setting {
    Inductive,
    Universum,
    SemiSupervised,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::Inductive, Setting::Universum, Setting::SemiSupervised];

    pub fn name(self) -> &'static str {
        match self {
            Setting::Inductive => "inductive",
            Setting::Universum => "universum",
            Setting::SemiSupervised => "semi_supervised",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inductive" => Ok(Setting::Inductive),
            "universum" => Ok(Setting::Universum),
            "semi_supervised" => Ok(Setting::SemiSupervised),
            other => Err(Error::Config(format!("unknown setting {other:?}"))),
        }
    }
}

pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_UNLABELED_WEIGHT: f64 = 0.5;

/// Setting plus its loss parameters. `eps` is tied to the setting:
/// `-margin` for universum, `1` for semi-supervised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingParams {
    pub setting: Setting,
    /// Insensitivity tube around maximum contradiction.
    pub margin: f64,
    pub eps: f64,
    /// Weight of the unlabeled term.
    pub unlabeled_weight: f64,
}

impl SettingParams {
    pub fn inductive() -> Self {
        SettingParams {
            setting: Setting::Inductive,
            margin: DEFAULT_MARGIN,
            eps: -DEFAULT_MARGIN,
            unlabeled_weight: 0.0,
        }
    }

    pub fn universum(margin: f64, unlabeled_weight: f64) -> Self {
        SettingParams {
            setting: Setting::Universum,
            margin,
            eps: -margin,
            unlabeled_weight,
        }
    }

    pub fn semi_supervised(unlabeled_weight: f64) -> Self {
        SettingParams {
            setting: Setting::SemiSupervised,
            margin: DEFAULT_MARGIN,
            eps: 1.0,
            unlabeled_weight,
        }
    }

    pub fn for_setting(setting: Setting, margin: f64, unlabeled_weight: f64) -> Self {
        match setting {
            Setting::Inductive => SettingParams {
                margin,
                eps: -margin,
                ..Self::inductive()
            },
            Setting::Universum => Self::universum(margin, unlabeled_weight),
            Setting::SemiSupervised => SettingParams {
                margin,
                ..Self::semi_supervised(unlabeled_weight)
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.margin >= 0.0) {
            return Err(Error::Config(format!("margin must be >= 0, got {}", self.margin)));
        }
        if !(self.unlabeled_weight >= 0.0) {
            return Err(Error::Config(format!(
                "unlabeled weight must be >= 0, got {}",
                self.unlabeled_weight
            )));
        }
        match self.setting {
            Setting::Universum if self.eps != -self.margin => Err(Error::Config(format!(
                "universum requires eps = -margin, got eps {} margin {}",
                self.eps, self.margin
            ))),
            Setting::SemiSupervised if self.eps != 1.0 => Err(Error::Config(format!(
                "semi-supervised requires eps = 1, got {}",
                self.eps
            ))),
            _ => Ok(()),
        }
    }
}

fn check_labels(labels: &[usize], classes: usize) -> Result<()> {
    match labels.iter().find(|&&y| y >= classes) {
        Some(bad) => Err(Error::Domain(format!("label {bad} out of range 0..{classes}"))),
        None => Ok(()),
    }
}

/// `offset * (1 - onehot(labels))` as a constant `n x L` matrix.
fn off_target<'t>(tape: &'t Tape, labels: &[usize], classes: usize, offset: f64) -> Tensor<'t> {
    let mut m = Matrix::filled(labels.len(), classes, offset);
    for (i, &y) in labels.iter().enumerate() {
        m.set(i, y, 0.0);
    }
    tape.constant(m)
}

/// Per-row `max_k { offset(1 - [k = y]) + s_k - s_y }`, shape `n x 1`.
fn margin_violation<'t>(scores: Tensor<'t>, labels: &[usize], offset: f64) -> Result<Tensor<'t>> {
    let (rows, classes) = scores.shape();
    if labels.len() != rows {
        return Err(Error::shape("hinge", format!("{} labels for {rows} score rows", labels.len())));
    }
    check_labels(labels, classes)?;
    let target = scores.pick(labels)?;
    scores
        .add(off_target(scores.tape(), labels, classes, offset))?
        .sub(target)?
        .row_max()
}

/// Crammer–Singer multiclass hinge: `sum_i max_k {1 - [k = y_i] + s_ik - s_iy_i}`.
pub fn cs_hinge<'t>(scores: Tensor<'t>, labels: &[usize]) -> Result<Tensor<'t>> {
    Ok(margin_violation(scores, labels, 1.0)?.sum(Axis::All))
}

/// Universum hinge: `sum_i sum_k max{ |s_ik - max_l s_il| - margin, 0 }`.
pub fn universum_hinge<'t>(scores: Tensor<'t>, margin: f64) -> Result<Tensor<'t>> {
    if !(margin >= 0.0) {
        return Err(Error::Domain(format!("margin must be >= 0, got {margin}")));
    }
    if scores.shape().0 == 0 {
        return Ok(scores.sum(Axis::All));
    }
    let top = scores.row_max()?;
    Ok(scores
        .sub(top)?
        .abs()
        .add_scalar(-margin)
        .max_const(0.0)
        .sum(Axis::All))
}

/// Current-model pseudo-labels (row argmax, lowest index on ties).
pub fn pseudo_labels(scores: Tensor<'_>) -> Result<Vec<usize>> {
    if scores.shape().0 == 0 {
        return Ok(Vec::new());
    }
    scores.row_argmax()
}

/// Semi-supervised hinge: the C&S hinge against the pseudo-label of each
/// row. The pseudo-label is a constant for differentiation.
pub fn semisup_hinge<'t>(scores: Tensor<'t>) -> Result<Tensor<'t>> {
    let labels = pseudo_labels(scores)?;
    cs_hinge(scores, &labels)
}

/// Expands each unlabeled row into `classes` copies labeled `0..classes`.
pub fn transform_unlabeled(batch: &UnlabeledBatch, classes: usize, eps: f64) -> Result<UnifiedBatch> {
    let layout = UnifiedLayout::new(batch.len(), classes, eps)?;
    let features = batch.features.select_rows(&layout.origin);
    Ok(UnifiedBatch { features, layout })
}

/// Unified hinge over expanded rows:
/// `sum_i psi( max_k { eps(1 - [k = y_i]) + s_ik - s_iy_i } )`.
pub fn unified_hinge<'t>(scores: Tensor<'t>, layout: &UnifiedLayout) -> Result<Tensor<'t>> {
    let (rows, classes) = scores.shape();
    if rows != layout.len() || classes != layout.classes {
        return Err(Error::shape(
            "unified_hinge",
            format!(
                "scores {rows}x{classes} vs layout of {} rows and {} classes",
                layout.len(),
                layout.classes
            ),
        ));
    }
    let violation = margin_violation(scores, &layout.labels, layout.eps)?;
    let clipped = match layout.psi {
        PsiKind::Identity => violation,
        PsiKind::MinWithEps => violation.min_const(layout.eps),
    };
    Ok(clipped.sum(Axis::All))
}

/// Per row `max_k |s_k - max_l s_l|`; zero exactly at maximum contradiction.
pub fn contradiction_residual(scores: &Matrix) -> Vec<f64> {
    scores
        .iter_rows()
        .map(|row| {
            let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.iter().map(|s| (s - top).abs()).fold(0.0, f64::max)
        })
        .collect()
}
