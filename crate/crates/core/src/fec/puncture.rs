use crate::error::{invalid, Result};
use crate::params::CodeRate;

/// Keep-mask over one puncturing period of native bits (X1 Y1 X2 Y2 ...).
/// Rate 2/3 sends X1 Y1 Y2, rate 3/4 sends X1 Y1 Y2 X3.
pub fn pattern(rate: CodeRate) -> &'static [bool] {
    match rate {
        CodeRate::Half => &[true, true],
        CodeRate::TwoThirds => &[true, true, false, true],
        CodeRate::ThreeQuarters => &[true, true, false, true, true, false],
    }
}

fn kept_per_period(rate: CodeRate) -> usize {
    pattern(rate).iter().filter(|&&k| k).count()
}

pub fn puncture(coded: &[u8], rate: CodeRate) -> Result<Vec<u8>> {
    let pat = pattern(rate);
    if coded.len() % pat.len() != 0 {
        return Err(invalid(format!(
            "{} native bits is not a multiple of the rate-{rate} puncturing period {}",
            coded.len(),
            pat.len()
        )));
    }
    Ok(coded
        .iter()
        .zip(pat.iter().cycle())
        .filter_map(|(&b, &keep)| keep.then_some(b))
        .collect())
}

/// Soft input to the Viterbi decoder at the native code rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftBlock {
    /// Positive favours bit 0.
    pub llrs: Vec<f64>,
    pub erased: Vec<bool>,
}

impl SoftBlock {
    /// Unpunctured block without erasures.
    pub fn from_llrs(llrs: Vec<f64>) -> Self {
        let erased = vec![false; llrs.len()];
        SoftBlock { llrs, erased }
    }

    /// Hard bits as +-`amplitude` LLRs.
    pub fn from_hard(bits: &[u8], amplitude: f64) -> Self {
        Self::from_llrs(
            bits.iter()
                .map(|&b| if b == 0 { amplitude } else { -amplitude })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.llrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llrs.is_empty()
    }
}

/// Reinserts punctured positions as zero-LLR erasures.
pub fn depuncture(soft: &[f64], rate: CodeRate) -> Result<SoftBlock> {
    let pat = pattern(rate);
    let kept = kept_per_period(rate);
    if soft.len() % kept != 0 {
        return Err(invalid(format!(
            "{} soft values do not fill whole rate-{rate} puncturing periods",
            soft.len()
        )));
    }
    let native = soft.len() / kept * pat.len();
    let mut llrs = Vec::with_capacity(native);
    let mut erased = Vec::with_capacity(native);
    let mut src = soft.iter();
    for &keep in pat.iter().cycle().take(native) {
        if keep {
            llrs.push(*src.next().unwrap());
            erased.push(false);
        } else {
            llrs.push(0.0);
            erased.push(true);
        }
    }
    Ok(SoftBlock { llrs, erased })
}
