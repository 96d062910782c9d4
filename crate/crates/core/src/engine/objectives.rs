use std::str::FromStr;

use crate::error::{Error, Result};
use crate::losses::{cs_hinge, semisup_hinge, unified_hinge, UnifiedLayout};
use crate::tensor::{Axis, Tensor};

pub const DEFAULT_GEN_WEIGHT: f64 = 0.1;
pub const DEFAULT_LAMBDA: f64 = 0.1;

/// Generator objective.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GenLossKind {
    FmOnly,
    #[default]
    FmPlusCompliance,
    /// Feature matching plus `lambda` times the pseudo-labeled hinge on
    /// generated scores. A hinge discriminator has no probabilities, so the
    /// log-likelihood form of this term is replaced by the hinge.
    FmPlusLDisc,
}

impl GenLossKind {
    pub fn name(self) -> &'static str {
        match self {
            GenLossKind::FmOnly => "fm_only",
            GenLossKind::FmPlusCompliance => "fm_plus_compliance",
            GenLossKind::FmPlusLDisc => "fm_plus_ldisc",
        }
    }
}

impl FromStr for GenLossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fm_only" => Ok(GenLossKind::FmOnly),
            "fm_plus_compliance" => Ok(GenLossKind::FmPlusCompliance),
            "fm_plus_ldisc" => Ok(GenLossKind::FmPlusLDisc),
            other => Err(Error::Config(format!(
                "unknown generator loss {other:?} (expected fm_only, fm_plus_compliance or fm_plus_ldisc)"
            ))),
        }
    }
}

/// Weights of the generator objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenObjective {
    pub kind: GenLossKind,
    pub gen_weight: f64,
    pub lambda: f64,
}

impl Default for GenObjective {
    fn default() -> Self {
        GenObjective {
            kind: GenLossKind::default(),
            gen_weight: DEFAULT_GEN_WEIGHT,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

/// `|| mean(fake) - mean(real) ||` over feature columns.
pub fn feature_matching_loss<'t>(real_feats: Tensor<'t>, fake_feats: Tensor<'t>) -> Result<Tensor<'t>> {
    if real_feats.shape().1 != fake_feats.shape().1 {
        return Err(Error::shape(
            "feature_matching_loss",
            format!("{} vs {} feature columns", real_feats.shape().1, fake_feats.shape().1),
        ));
    }
    if real_feats.shape().0 == 0 || fake_feats.shape().0 == 0 {
        return Err(Error::Domain("feature matching needs non-empty batches".into()));
    }
    let fake = fake_feats.mean(Axis::PerCol)?;
    let real = real_feats.mean(Axis::PerCol)?;
    Ok(fake.sub(real)?.l2_norm())
}

/// Discriminator loss: `cs_hinge / n + C_U * unified_hinge(eps) / m`, with
/// generated rows expanded into one copy per class.
pub fn disc_loss_ugan<'t>(
    scores_lab: Tensor<'t>,
    labels: &[usize],
    scores_gen: Tensor<'t>,
    unlabeled_weight: f64,
    eps: f64,
) -> Result<Tensor<'t>> {
    let n = scores_lab.shape().0;
    if n == 0 {
        return Err(Error::Domain("empty labeled batch".into()));
    }
    let labeled = cs_hinge(scores_lab, labels)?.scale(1.0 / n as f64);
    if unlabeled_weight == 0.0 {
        return Ok(labeled);
    }
    let (m, classes) = scores_gen.shape();
    if m == 0 {
        return Err(Error::Domain("empty unlabeled batch".into()));
    }
    if classes != scores_lab.shape().1 {
        return Err(Error::shape(
            "disc_loss_ugan",
            format!("{} vs {} score columns", scores_lab.shape().1, classes),
        ));
    }
    let layout = UnifiedLayout::new(m, classes, eps)?;
    let unified = unified_hinge(layout.expand_scores(scores_gen)?, &layout)?;
    labeled.add(unified.scale(unlabeled_weight / m as f64))
}

/// Generator loss for the configured objective.
pub fn gen_loss<'t>(
    fake_scores: Tensor<'t>,
    real_feats: Tensor<'t>,
    fake_feats: Tensor<'t>,
    obj: &GenObjective,
) -> Result<Tensor<'t>> {
    let fm = feature_matching_loss(real_feats, fake_feats)?;
    let weight = match obj.kind {
        GenLossKind::FmOnly => return Ok(fm),
        GenLossKind::FmPlusCompliance => obj.gen_weight,
        GenLossKind::FmPlusLDisc => obj.lambda,
    };
    let m = fake_scores.shape().0 as f64;
    fm.add(semisup_hinge(fake_scores)?.scale(weight / m))
}
