//! Fixed numeric formatting shared by console and CSV output.

use shardsec_core::LogProb;

/// Six significant digits.
pub fn prob(p: LogProb) -> String {
    sig6(p.prob())
}

/// log10 with six decimals; `-inf` for an exact zero.
pub fn log10(p: LogProb) -> String {
    format!("{:.6}", p.log10())
}

pub fn years(y: f64) -> String {
    if y.is_infinite() {
        "inf".to_owned()
    } else {
        sig6(y)
    }
}

pub fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}
