//! Reconstruction quality metrics: L1 distance, IoU of ink masks, PSNR.

use crate::raster::{Image, RasterError};

/// Metric triple for one image pair. Ink is defined as pixel value < 0.5
/// (the render transfer maps interiors to 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub l1: f64,
    pub iou: f64,
    pub psnr: f64,
}

impl MetricReport {
    /// Single CSV line: l1,iou,psnr.
    pub fn to_csv(&self) -> String {
        format!("{:.6},{:.6},{:.4}", self.l1, self.iou, self.psnr)
    }
}

/// Compares two images in [0,1] of equal dimensions.
pub fn compare(a: &Image, b: &Image) -> Result<MetricReport, RasterError> {
    a.same_shape(b)?;
    let n = a.data.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.data.iter().zip(&b.data) {
        let diff = x - y;
        abs_sum += diff.abs();
        sq_sum += diff * diff;
        let ink_a = x < 0.5;
        let ink_b = y < 0.5;
        if ink_a && ink_b {
            inter += 1;
        }
        if ink_a || ink_b {
            union += 1;
        }
    }
    let mse = sq_sum / n;
    Ok(MetricReport {
        l1: abs_sum / n,
        iou: if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        },
        psnr: if mse == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (1.0 / mse).log10()
        },
    })
}
