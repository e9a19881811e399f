//! Field-level beam splitter and the interferometer built from two of them.
//!
//! The splitter maps input fields (e1, e2) to
//!
//! ```text
//! e_plus  = sqrt(t) e1 + sqrt(1-t) e2
//! e_minus = sqrt(1-t) e1 - e^{i delta} sqrt(t) e2
//! ```
//!
//! with `t` the power transmission and `delta` a phase error on the
//! reflected-path term. The map is unitary exactly when `delta = 0`;
//! a nonzero `delta` models an imperfect splitter that no longer
//! conserves energy shot by shot, which is the knob used to study how
//! sensitive the dip is to hardware imbalance.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signals::{combine, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splitter {
    t: f64,
    phase_error: f64,
}

impl Splitter {
    pub fn new(t: f64, phase_error: f64) -> Result<Self> {
        if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
            return Err(Error::domain(format!(
                "power transmission {t} outside [0, 1]"
            )));
        }
        if !phase_error.is_finite() {
            return Err(Error::domain("splitter phase error must be finite"));
        }
        Ok(Splitter { t, phase_error })
    }

    pub fn balanced() -> Self {
        Splitter {
            t: 0.5,
            phase_error: 0.0,
        }
    }

    pub fn transmission(&self) -> f64 {
        self.t
    }

    pub fn phase_error(&self) -> f64 {
        self.phase_error
    }

    /// Combine two input fields into the sum and difference ports.
    ///
    /// Real-voltage inputs require `phase_error = 0`: rotating a real
    /// waveform by a complex phase is not a pointwise operation, and the
    /// combine layer rejects the attempt rather than approximating it.
    pub fn split(
        &self,
        e1: &SampledSignal,
        e2: &SampledSignal,
    ) -> Result<(SampledSignal, SampledSignal)> {
        let ct = Complex64::new(self.t.sqrt(), 0.0);
        let cr = Complex64::new((1.0 - self.t).sqrt(), 0.0);
        let err = Complex64::from_polar(1.0, self.phase_error);
        let plus = combine(e1, e2, ct, cr)?;
        let minus = combine(e1, e2, cr, -(err * ct))?;
        Ok((plus, minus))
    }
}

/// Which interferometer arm, if any, is physically blocked before the
/// recombining splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MziBlock {
    None,
    Plus,
    Minus,
}

/// Recombine the two splitter ports on a balanced splitter after a phase
/// `theta` on the minus arm:
///
/// ```text
/// out1 = (plus + e^{i theta} minus) / sqrt(2)
/// out2 = (plus - e^{i theta} minus) / sqrt(2)
/// ```
///
/// With both ports of a balanced first splitter fed in and `theta = 0`
/// this undoes the first splitter exactly; `theta = pi` swaps the
/// outputs. Blocking an arm zeroes it before recombination.
///
/// Real-voltage signals admit only `theta` equal to 0 or pi (mod 2 pi),
/// the phases that act as real factors.
pub fn mzi_recombine(
    plus: &SampledSignal,
    minus: &SampledSignal,
    theta: f64,
    block: MziBlock,
) -> Result<(SampledSignal, SampledSignal)> {
    if !theta.is_finite() {
        return Err(Error::domain("interferometer phase must be finite"));
    }
    let blocked_plus;
    let blocked_minus;
    let (p, m): (&SampledSignal, &SampledSignal) = match block {
        MziBlock::None => (plus, minus),
        MziBlock::Plus => {
            blocked_plus = plus.zeroed_like();
            (&blocked_plus, minus)
        }
        MziBlock::Minus => {
            blocked_minus = minus.zeroed_like();
            (plus, &blocked_minus)
        }
    };
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rot = Complex64::from_polar(1.0, theta);
    let out1 = combine(p, m, inv_sqrt2, rot * inv_sqrt2)?;
    let out2 = combine(p, m, inv_sqrt2, -(rot * inv_sqrt2))?;
    Ok((out1, out2))
}
