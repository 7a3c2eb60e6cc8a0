//! Per-glyph optimization of a parabolic-curve field against a raster target
//! plus grid/contour signed-distance supervision.
//!
//! The objective is the weighted sum of an image MSE, two sign-agreement
//! hinges (grid and contour), and the parameter regularizer pulling
//! (p, q) to the unit circle and k^2 above a floor. Updates are plain Adam
//! on all 6 * N_p * N_a parameters with a cosine learning-rate schedule;
//! the best-loss iterate is returned, not the last.

use crate::exact_sdf::{ContourSamples, SdfGrid};
use crate::pseudo_field::{
    raster_intensity, raster_intensity_deriv, Field, FieldGrads, ParabolicCurve, RenderConfig,
};
use crate::raster::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, Write};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("no interior sample in the grid (empty glyph image)")]
    NoInterior,
    #[error("loss diverged to a non-finite value at step {step}")]
    Divergence { step: usize, report: Box<FitReport> },
}

/// Loss term weights and the k^2 floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_image: f64,
    pub lambda_grid: f64,
    pub lambda_contour: f64,
    pub lambda_regular: f64,
    pub lambda_ksq: f64,
    pub k_min_sq: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_image: 1.0,
            lambda_grid: 100.0,
            lambda_contour: 1000.0,
            lambda_regular: 1.0,
            lambda_ksq: 0.1,
            k_min_sq: 0.25,
        }
    }
}

/// Optimizer settings. The defaults target direct per-glyph fitting
/// (lr 1e-2 with cosine decay to 1e-3 over 2000 steps); constant-rate
/// schedules are available by setting final_learning_rate = learning_rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub final_learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            steps: 2000,
            learning_rate: 1e-2,
            final_learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            gamma: crate::pseudo_field::DEFAULT_GAMMA,
            seed: 0,
        }
    }
}

/// One loss evaluation split into its components (unweighted values are not
/// kept; every entry is already multiplied by its lambda except the parts,
/// which are raw, so total = sum of lambda * part).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub image: f64,
    pub grid: f64,
    pub contour: f64,
    pub regular: f64,
    pub total: f64,
}

/// Per-step loss history plus the returned iterate's loss and wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub history: Vec<LossBreakdown>,
    pub final_loss: LossBreakdown,
    pub wall_time_secs: f64,
}

impl FitReport {
    /// Line-oriented text: step, L_image, L_grid, L_contour, L_regular, total.
    pub fn write_text(&self, mut w: impl Write) -> io::Result<()> {
        for (i, l) in self.history.iter().enumerate() {
            writeln!(
                w,
                "{} {:.9e} {:.9e} {:.9e} {:.9e} {:.9e}",
                i + 1,
                l.image,
                l.grid,
                l.contour,
                l.regular,
                l.total
            )?;
        }
        Ok(())
    }
}

/// Mean squared per-pixel difference.
pub fn loss_image(rendered: &Image, target: &Image) -> Result<f64, FitError> {
    rendered
        .same_shape(target)
        .map_err(|e| FitError::ShapeMismatch(e.to_string()))?;
    let m = rendered.data.len() as f64;
    Ok(rendered
        .data
        .iter()
        .zip(&target.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / m)
}

/// Sign-agreement hinge between pseudo distances G and exact distances D:
/// mean ReLU(-G * D). Zero whenever every pair shares a sign (0 agrees).
pub fn loss_sdf_hinge(g_vals: &[f64], d_vals: &[f64]) -> Result<f64, FitError> {
    if g_vals.len() != d_vals.len() {
        return Err(FitError::ShapeMismatch(format!(
            "{} pseudo vs {} exact distances",
            g_vals.len(),
            d_vals.len()
        )));
    }
    if g_vals.is_empty() {
        return Err(FitError::EmptyInput("sdf hinge"));
    }
    let m = g_vals.len() as f64;
    Ok(g_vals
        .iter()
        .zip(d_vals)
        .map(|(g, d)| (-g * d).max(0.0))
        .sum::<f64>()
        / m)
}

/// Parameter regularizer: k^2 floor hinge plus the unit-circle penalty on
/// (p, q), averaged over all curves.
pub fn loss_regular(field: &Field, k_min_sq: f64, lambda_ksq: f64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0.0;
    for curves in field.primitives() {
        for c in curves {
            let norm = c.p * c.p + c.q * c.q - 1.0;
            sum += lambda_ksq * (k_min_sq - c.k * c.k).max(0.0) + norm * norm;
            count += 1.0;
        }
    }
    sum / count
}

fn grid_d_values(grid: &SdfGrid) -> &[f64] {
    &grid.samples
}

/// Weighted total loss with the component breakdown. Components with a zero
/// weight are skipped entirely (and contribute zero).
pub fn loss_total(
    field: &Field,
    rendered: &Image,
    target: &Image,
    grid: &SdfGrid,
    contour: &ContourSamples,
    weights: &LossWeights,
) -> Result<LossBreakdown, FitError> {
    let mut b = LossBreakdown::default();
    if weights.lambda_image > 0.0 {
        b.image = loss_image(rendered, target)?;
    }
    if weights.lambda_grid > 0.0 {
        if rendered.width != grid.width || rendered.height != grid.height {
            return Err(FitError::ShapeMismatch(format!(
                "render {}x{} vs grid {}x{}",
                rendered.width, rendered.height, grid.width, grid.height
            )));
        }
        let g: Vec<f64> = (0..grid.samples.len())
            .map(|i| {
                let (row, col) = (i / grid.width, i % grid.width);
                let p = grid.pixel_center(row, col);
                field.eval(p.x, p.y).value
            })
            .collect();
        b.grid = loss_sdf_hinge(&g, grid_d_values(grid))?;
    }
    if weights.lambda_contour > 0.0 {
        let g: Vec<f64> = contour
            .samples
            .iter()
            .map(|s| field.eval(s.x, s.y).value)
            .collect();
        let d: Vec<f64> = contour.samples.iter().map(|s| s.d).collect();
        b.contour = loss_sdf_hinge(&g, &d)?;
    }
    if weights.lambda_regular > 0.0 {
        b.regular = loss_regular(field, weights.k_min_sq, weights.lambda_ksq);
    }
    b.total = weights.lambda_image * b.image
        + weights.lambda_grid * b.grid
        + weights.lambda_contour * b.contour
        + weights.lambda_regular * b.regular;
    Ok(b)
}

/// Full objective and its gradient in one pass.
///
/// The image and grid terms share the pixel-center lattice, so the field is
/// evaluated once per pixel and the two adjoints are summed before routing.
pub fn objective_and_gradient(
    field: &Field,
    target: &Image,
    grid: &SdfGrid,
    contour: &ContourSamples,
    weights: &LossWeights,
    gamma: f64,
) -> Result<(LossBreakdown, FieldGrads), FitError> {
    let (w, h) = (grid.width, grid.height);
    if target.width != w || target.height != h {
        return Err(FitError::ShapeMismatch(format!(
            "target {}x{} vs grid {}x{}",
            target.width, target.height, w, h
        )));
    }
    if weights.lambda_contour > 0.0 && contour.samples.is_empty() {
        return Err(FitError::EmptyInput("sdf hinge"));
    }

    let mut grads = FieldGrads::zeros(field);
    let mut b = LossBreakdown::default();
    let m_pixels = (w * h) as f64;

    let need_pixels = weights.lambda_image > 0.0 || weights.lambda_grid > 0.0;
    if need_pixels {
        for row in 0..h {
            for col in 0..w {
                let p = Image::pixel_center(w, h, row, col);
                let ev = field.eval(p.x, p.y);
                let mut adjoint = 0.0;
                if weights.lambda_image > 0.0 {
                    let rendered = raster_intensity(ev.value, gamma);
                    let diff = rendered - target.get(row, col);
                    b.image += diff * diff / m_pixels;
                    adjoint += weights.lambda_image
                        * (2.0 * diff / m_pixels)
                        * raster_intensity_deriv(ev.value, gamma);
                }
                if weights.lambda_grid > 0.0 {
                    let d = grid.get(row, col);
                    let margin = -ev.value * d;
                    if margin > 0.0 {
                        b.grid += margin / m_pixels;
                        adjoint += weights.lambda_grid * (-d / m_pixels);
                    }
                }
                if adjoint != 0.0 {
                    grads.accumulate(field, &ev, p.x, p.y, adjoint);
                }
            }
        }
    }

    if weights.lambda_contour > 0.0 {
        let m_c = contour.samples.len() as f64;
        for s in &contour.samples {
            let ev = field.eval(s.x, s.y);
            let margin = -ev.value * s.d;
            if margin > 0.0 {
                b.contour += margin / m_c;
                let adjoint = weights.lambda_contour * (-s.d / m_c);
                grads.accumulate(field, &ev, s.x, s.y, adjoint);
            }
        }
    }

    if weights.lambda_regular > 0.0 {
        let n = (field.n_primitives() * field.curves_per_primitive()) as f64;
        let scale = weights.lambda_regular / n;
        for (i, curves) in field.primitives().iter().enumerate() {
            for (j, c) in curves.iter().enumerate() {
                let norm = c.p * c.p + c.q * c.q - 1.0;
                b.regular +=
                    (weights.lambda_ksq * (weights.k_min_sq - c.k * c.k).max(0.0) + norm * norm)
                        / n;
                let base = (i * field.curves_per_primitive() + j) * 6;
                if c.k * c.k < weights.k_min_sq {
                    grads.data[base] += scale * weights.lambda_ksq * (-2.0 * c.k);
                }
                grads.data[base + 1] += scale * 4.0 * c.p * norm;
                grads.data[base + 2] += scale * 4.0 * c.q * norm;
            }
        }
    }

    b.total = weights.lambda_image * b.image
        + weights.lambda_grid * b.grid
        + weights.lambda_contour * b.contour
        + weights.lambda_regular * b.regular;
    Ok((b, grads))
}

const INIT_CURVATURE: f64 = 0.7;
const INIT_RADIUS: f64 = 0.15;

/// Builds an initial field: farthest-point-sampled centers over the glyph
/// interior, each surrounded by n_a parabolas whose inside regions overlap
/// in a blob around the center (H = -INIT_RADIUS exactly at the center).
pub fn init_field(grid: &SdfGrid, n_p: usize, n_a: usize, seed: u64) -> Result<Field, FitError> {
    assert!(n_p >= 1 && n_a >= 1);
    let interior = grid.interior_points();
    if interior.is_empty() {
        return Err(FitError::NoInterior);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // farthest-point sampling, seeded start, lowest-index tie break
    let mut centers = vec![interior[rng.gen_range(0..interior.len())]];
    let mut min_d2: Vec<f64> = interior.iter().map(|p| p.dist(centers[0]).powi(2)).collect();
    while centers.len() < n_p {
        let (mut best_i, mut best_d) = (0, -1.0);
        for (i, &d2) in min_d2.iter().enumerate() {
            if d2 > best_d {
                best_d = d2;
                best_i = i;
            }
        }
        let c = interior[best_i];
        centers.push(c);
        for (i, p) in interior.iter().enumerate() {
            min_d2[i] = min_d2[i].min(p.dist(c).powi(2));
        }
    }

    let primitives = centers
        .iter()
        .map(|c| {
            (0..n_a)
                .map(|j| {
                    let theta = std::f64::consts::TAU * j as f64 / n_a as f64;
                    let (dir_x, dir_y) = (theta.cos(), theta.sin());
                    let (p, q) = (-theta.sin(), theta.cos());
                    let k = INIT_CURVATURE;
                    // express the parabola in center-local coordinates so the
                    // blob really surrounds the center: folding the shift of
                    // the quadratic term into d, e, f keeps H(center) = -r0
                    let m = p * c.x + q * c.y;
                    ParabolicCurve {
                        k,
                        p,
                        q,
                        d: dir_x - 2.0 * k * m * p,
                        e: dir_y - 2.0 * k * m * q,
                        f: k * m * m - (dir_x * c.x + dir_y * c.y) - INIT_RADIUS,
                    }
                })
                .collect()
        })
        .collect();
    Ok(Field::new(primitives))
}

/// Runs `cfg.steps` Adam updates and returns the best-loss iterate with the
/// per-step loss history.
pub fn fit(
    init: &Field,
    target: &Image,
    grid: &SdfGrid,
    contour: &ContourSamples,
    weights: &LossWeights,
    cfg: &FitConfig,
) -> Result<(Field, FitReport), FitError> {
    assert!(cfg.steps >= 1, "steps must be at least 1");
    assert!(cfg.learning_rate > 0.0);
    assert!((0.0..1.0).contains(&cfg.beta1) && (0.0..1.0).contains(&cfg.beta2));

    let start = Instant::now();
    let n_p = init.n_primitives();
    let n_a = init.curves_per_primitive();
    let mut theta = init.flat_params();
    let mut m = vec![0.0; theta.len()];
    let mut v = vec![0.0; theta.len()];
    let mut history = Vec::with_capacity(cfg.steps);
    let mut best: Option<(f64, Vec<f64>, LossBreakdown)> = None;

    for step in 1..=cfg.steps {
        let field = Field::from_flat(n_p, n_a, &theta);
        let (loss, grads) = objective_and_gradient(&field, target, grid, contour, weights, cfg.gamma)?;
        history.push(loss);
        if !loss.total.is_finite() {
            let report = FitReport {
                history,
                final_loss: loss,
                wall_time_secs: start.elapsed().as_secs_f64(),
            };
            return Err(FitError::Divergence {
                step,
                report: Box::new(report),
            });
        }
        if best.as_ref().is_none_or(|(b, _, _)| loss.total < *b) {
            best = Some((loss.total, theta.clone(), loss));
        }

        // cosine schedule from learning_rate down to final_learning_rate
        let lr = if cfg.steps == 1 {
            cfg.learning_rate
        } else {
            let progress = (step - 1) as f64 / (cfg.steps - 1) as f64;
            cfg.final_learning_rate
                + 0.5 * (cfg.learning_rate - cfg.final_learning_rate)
                    * (1.0 + (std::f64::consts::PI * progress).cos())
        };
        let bc1 = 1.0 - cfg.beta1.powi(step as i32);
        let bc2 = 1.0 - cfg.beta2.powi(step as i32);
        for i in 0..theta.len() {
            let g = grads.data[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            theta[i] -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }

    // the final iterate was never scored inside the loop
    let final_field = Field::from_flat(n_p, n_a, &theta);
    let rendered = crate::pseudo_field::render(
        &final_field,
        &RenderConfig {
            gamma: cfg.gamma,
            width: grid.width,
            height: grid.height,
        },
    );
    let final_loss = loss_total(&final_field, &rendered, target, grid, contour, weights)?;
    if final_loss.total.is_finite()
        && best.as_ref().is_none_or(|(b, _, _)| final_loss.total < *b)
    {
        best = Some((final_loss.total, theta, final_loss));
    }

    let (_, best_theta, best_loss) = best.expect("at least one evaluation");
    let report = FitReport {
        history,
        final_loss: best_loss,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok((Field::from_flat(n_p, n_a, &best_theta), report))
}
