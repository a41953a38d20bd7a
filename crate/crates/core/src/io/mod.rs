//! Configuration input, CSV and SVG output.

pub mod config;
pub mod csv;
pub mod svg;

/// Conversion from `gamma` units to physical units on output.
///
/// Rates, detunings and intensities are multiplied by `gamma`; times are
/// divided by it. Photon numbers are dimensionless and pass through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub gamma: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self { gamma: 1.0 }
    }
}

impl Units {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    pub fn rate(&self, v: f64) -> f64 {
        if self.gamma == 1.0 {
            v
        } else {
            v * self.gamma
        }
    }

    pub fn time(&self, t: f64) -> f64 {
        if self.gamma == 1.0 {
            t
        } else {
            t / self.gamma
        }
    }

    /// Axis label with the unit appended when output is in `gamma` units.
    pub fn label(&self, name: &str) -> String {
        if self.gamma == 1.0 {
            format!("{name} [gamma]")
        } else {
            name.to_string()
        }
    }

    pub fn time_label(&self, name: &str) -> String {
        if self.gamma == 1.0 {
            format!("{name} [1/gamma]")
        } else {
            name.to_string()
        }
    }
}
