use crate::error::{Error, Result};

/// Binary losses over a real score and a label in `{-1, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    Logistic,
    Hinge,
}

impl Loss {
    pub fn eval(self, score: f64, label: f64) -> Result<(f64, f64)> {
        match self {
            Loss::Logistic => logistic_loss(score, label),
            Loss::Hinge => hinge_loss(score, label),
        }
    }
}

fn check_label(label: f64) -> Result<()> {
    if label == 1.0 || label == -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("label {label} is not -1 or +1")))
    }
}

/// `log(1 + exp(-y s))` and its derivative in `s`, stable for large `|s|`.
pub fn logistic_loss(score: f64, label: f64) -> Result<(f64, f64)> {
    check_label(label)?;
    let m = -label * score;
    let loss = if m > 0.0 {
        m + (-m).exp().ln_1p()
    } else {
        m.exp().ln_1p()
    };
    let grad = -label * super::lstm::sigmoid(m);
    Ok((loss, grad))
}

/// Unsquared hinge `max(0, 1 - y s)`; the subgradient at the kink is 0.
pub fn hinge_loss(score: f64, label: f64) -> Result<(f64, f64)> {
    check_label(label)?;
    let margin = 1.0 - label * score;
    if margin > 0.0 {
        Ok((margin, -label))
    } else {
        Ok((0.0, 0.0))
    }
}
