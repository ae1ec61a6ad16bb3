use std::f64::consts::PI;

use crate::linalg::{SymMatrix, Vector};

/// Closed-form initial data, evaluated at physical positions.
#[derive(Clone, Debug)]
pub enum InitialDatum {
    Constant(f64),
    /// `⟨p, x⟩ + offset`
    Linear { p: Vector, offset: f64 },
    /// `⟨p, x − c⟩ + ½⟨X(x − c), x − c⟩`
    Quadratic {
        center: Vector,
        p: Vector,
        x: SymMatrix,
    },
    /// `a Π_i sin(2π m x_i)`
    Sine { amplitude: f64, wavenumber: f64 },
    /// `h (1 − |x − c|²/r²)³` inside the ball, 0 outside.
    Bump {
        center: Vector,
        radius: f64,
        height: f64,
    },
}

impl InitialDatum {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            InitialDatum::Constant(c) => *c,
            InitialDatum::Linear { p, offset } => crate::linalg::dot(p.as_slice(), x) + offset,
            InitialDatum::Quadratic { center, p, x: m } => {
                let y: Vec<f64> = x.iter().zip(center.iter()).map(|(a, c)| a - c).collect();
                crate::linalg::dot(p.as_slice(), &y) + 0.5 * m.quad_form_slice(&y)
            }
            InitialDatum::Sine {
                amplitude,
                wavenumber,
            } => {
                amplitude
                    * x.iter()
                        .map(|xi| (2.0 * PI * wavenumber * xi).sin())
                        .product::<f64>()
            }
            InitialDatum::Bump {
                center,
                radius,
                height,
            } => {
                let r2: f64 = x
                    .iter()
                    .zip(center.iter())
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    / (radius * radius);
                if r2 >= 1.0 {
                    0.0
                } else {
                    height * (1.0 - r2).powi(3)
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialDatum::Constant(_) => "constant",
            InitialDatum::Linear { .. } => "linear",
            InitialDatum::Quadratic { .. } => "quadratic",
            InitialDatum::Sine { .. } => "sine",
            InitialDatum::Bump { .. } => "bump",
        }
    }
}
