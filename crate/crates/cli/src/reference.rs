//! Published conquering probabilities and years-to-fail for the two
//! standard scenarios, kept verbatim for side-by-side comparison.

/// Relative slack allowed between a published years-to-fail figure and
/// `1 / (365 * P)` recomputed from the published probability.
pub const YF_TOLERANCE: f64 = 0.005;
pub const REFERENCE_EPOCHS_PER_YEAR: f64 = 365.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    /// 1 = N 2000 / V 200 / V' 400, 2 = N 4000 / V 400 / V' 800.
    pub scenario: u8,
    pub malicious_fraction: f64,
    pub p: &'static str,
    pub years_to_fail: &'static str,
}

pub const TABLE: [Reference; 8] = [
    Reference { scenario: 1, malicious_fraction: 0.10, p: "3.63E-66", years_to_fail: "7.56E+62" },
    Reference { scenario: 1, malicious_fraction: 0.15, p: "2.10E-34", years_to_fail: "1.30E+31" },
    Reference { scenario: 1, malicious_fraction: 0.20, p: "1.58E-18", years_to_fail: "1.74E+17" },
    Reference { scenario: 1, malicious_fraction: 0.30, p: "1.70E-04", years_to_fail: "16.12" },
    Reference { scenario: 2, malicious_fraction: 0.10, p: "0.0", years_to_fail: "inf" },
    Reference { scenario: 2, malicious_fraction: 0.15, p: "5.14E-80", years_to_fail: "5.33E+76" },
    Reference { scenario: 2, malicious_fraction: 0.20, p: "2.01E-41", years_to_fail: "1.36E+38" },
    Reference { scenario: 2, malicious_fraction: 0.30, p: "5.30E-07", years_to_fail: "5171.32" },
];

impl Reference {
    pub fn p_value(&self) -> f64 {
        self.p.parse().expect("reference probability parses")
    }

    pub fn years_value(&self) -> f64 {
        self.years_to_fail.parse().expect("reference years parse")
    }

    /// `1 / (365 * P)` from the published probability.
    pub fn implied_years(&self) -> f64 {
        1.0 / (REFERENCE_EPOCHS_PER_YEAR * self.p_value())
    }

    pub fn is_consistent(&self) -> bool {
        let implied = self.implied_years();
        let published = self.years_value();
        if implied.is_infinite() || published.is_infinite() {
            return implied.is_infinite() && published.is_infinite();
        }
        ((published - implied) / implied).abs() <= YF_TOLERANCE
    }

    /// Empty for consistent rows; otherwise explains the mismatch.
    pub fn note(&self) -> String {
        if self.is_consistent() {
            String::new()
        } else {
            format!(
                "published Y_f {} disagrees with 1/(365*P) = {:.2E} (factor {:.1})",
                self.years_to_fail,
                self.implied_years(),
                self.years_value() / self.implied_years()
            )
        }
    }
}
