use std::io::Write;

use crate::quantize::MomentumMeasure;

/// Equirectangular density image of a measure on the sphere.
///
/// Rows run over `θ ∈ [0, π]` (top to bottom), columns over `φ ∈ [0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub width: usize,
    pub height: usize,
    /// Row-major smoothed density, one value per pixel centre.
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Palette {
    Gray,
    Viridis,
}

/// Smooths every atom with the kernel `exp((⟨u, d⟩ − 1)/σ²)`, which is a
/// Gaussian of angular width `σ` near the atom.
pub fn render(mu: &MomentumMeasure, width: usize, height: usize, bandwidth: f64) -> Heatmap {
    let inv = 1.0 / (bandwidth * bandwidth);
    let mut values = vec![0.0; width * height];
    for row in 0..height {
        let theta = (row as f64 + 0.5) * std::f64::consts::PI / height as f64;
        let (st, ct) = theta.sin_cos();
        for col in 0..width {
            let phi = (col as f64 + 0.5) * 2.0 * std::f64::consts::PI / width as f64;
            let (sp, cp) = phi.sin_cos();
            let u = [st * cp, st * sp, ct];
            let mut acc = 0.0;
            for a in mu.atoms() {
                let d = a.direction;
                let dot = u[0] * d[0] + u[1] * d[1] + u[2] * d[2];
                acc += a.weight * ((dot - 1.0) * inv).exp();
            }
            values[row * width + col] = acc;
        }
    }
    Heatmap { width, height, values }
}

const VIRIDIS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [71.0, 44.0, 122.0],
    [59.0, 81.0, 139.0],
    [44.0, 113.0, 142.0],
    [33.0, 144.0, 141.0],
    [39.0, 173.0, 129.0],
    [92.0, 200.0, 99.0],
    [170.0, 220.0, 50.0],
    [253.0, 231.0, 37.0],
];

fn color(palette: Palette, x: f64) -> [u8; 3] {
    let x = x.clamp(0.0, 1.0);
    match palette {
        Palette::Gray => {
            let v = (255.0 * x).round() as u8;
            [v, v, v]
        }
        Palette::Viridis => {
            let s = x * (VIRIDIS.len() - 1) as f64;
            let i = (s.floor() as usize).min(VIRIDIS.len() - 2);
            let f = s - i as f64;
            let c = |j: usize| (VIRIDIS[i][j] + f * (VIRIDIS[i + 1][j] - VIRIDIS[i][j])).round() as u8;
            [c(0), c(1), c(2)]
        }
    }
}

impl Heatmap {
    /// Pixel of maximal density as `(row, col)`.
    pub fn peak(&self) -> (usize, usize) {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        (i / self.width, i % self.width)
    }

    /// Binary PPM (P6), scaled so the peak is full intensity.
    pub fn write_ppm<W: Write>(&self, mut out: W, palette: Palette) -> std::io::Result<()> {
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        write!(
            out,
            "P6\n# rows: theta in [0, pi] from +z; columns: phi in [0, 2pi) from +x\n{} {}\n255\n",
            self.width, self.height
        )?;
        let mut bytes = Vec::with_capacity(3 * self.values.len());
        for &v in &self.values {
            let x = if max > 0.0 { v / max } else { 0.0 };
            bytes.extend_from_slice(&color(palette, x));
        }
        out.write_all(&bytes)
    }
}
