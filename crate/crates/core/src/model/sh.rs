use crate::error::{Error, Result};

pub const SH_C0: f64 = 0.282_094_791_773_878_14;
const SH_C1: f64 = 0.488_602_511_902_919_9;
const SH_C2: [f64; 5] = [
    1.092_548_430_592_079_2,
    -1.092_548_430_592_079_2,
    0.315_391_565_252_520_05,
    -1.092_548_430_592_079_2,
    0.546_274_215_296_039_6,
];
const SH_C3: [f64; 7] = [
    -0.590_043_589_926_643_5,
    2.890_611_442_640_554,
    -0.457_045_799_464_465_8,
    0.373_176_332_590_115_4,
    -0.457_045_799_464_465_8,
    1.445_305_721_320_277,
    -0.590_043_589_926_643_5,
];

/// Number of coefficients per color channel for an SH degree.
pub const fn sh_coeff_count(degree: usize) -> usize {
    (degree + 1) * (degree + 1)
}

/// Evaluates real spherical harmonics up to degree 3 in the usual 3DGS basis
/// and maps the result to RGB as `clamp(0.5 + sh, 0, 1)`.
///
/// `coeffs[k]` holds coefficient `k` for all three channels. `view_dir` points
/// from the camera center towards the Gaussian.
pub fn eval_sh(coeffs: &[[f32; 3]], view_dir: [f64; 3], degree: usize) -> Result<[f64; 3]> {
    if degree > 3 {
        return Err(Error::invalid(format!("SH degree {degree} exceeds 3")));
    }
    if coeffs.len() != sh_coeff_count(degree) {
        return Err(Error::invalid(format!(
            "SH degree {degree} needs {} coefficients per channel, got {}",
            sh_coeff_count(degree),
            coeffs.len()
        )));
    }
    if view_dir.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite view direction"));
    }
    Ok(eval_sh_unchecked(coeffs, view_dir, degree))
}

pub(crate) fn eval_sh_unchecked(coeffs: &[[f32; 3]], dir: [f64; 3], degree: usize) -> [f64; 3] {
    let c = |k: usize, ch: usize| coeffs[k][ch] as f64;
    let [x, y, z] = dir;
    let mut out = [0.0; 3];
    for (ch, o) in out.iter_mut().enumerate() {
        let mut v = SH_C0 * c(0, ch);
        if degree > 0 {
            v += -SH_C1 * y * c(1, ch) + SH_C1 * z * c(2, ch) - SH_C1 * x * c(3, ch);
            if degree > 1 {
                let (xx, yy, zz) = (x * x, y * y, z * z);
                let (xy, yz, xz) = (x * y, y * z, x * z);
                v += SH_C2[0] * xy * c(4, ch)
                    + SH_C2[1] * yz * c(5, ch)
                    + SH_C2[2] * (2.0 * zz - xx - yy) * c(6, ch)
                    + SH_C2[3] * xz * c(7, ch)
                    + SH_C2[4] * (xx - yy) * c(8, ch);
                if degree > 2 {
                    v += SH_C3[0] * y * (3.0 * xx - yy) * c(9, ch)
                        + SH_C3[1] * xy * z * c(10, ch)
                        + SH_C3[2] * y * (4.0 * zz - xx - yy) * c(11, ch)
                        + SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * c(12, ch)
                        + SH_C3[4] * x * (4.0 * zz - xx - yy) * c(13, ch)
                        + SH_C3[5] * z * (xx - yy) * c(14, ch)
                        + SH_C3[6] * x * (xx - 3.0 * yy) * c(15, ch);
                }
            }
        }
        *o = (v + 0.5).clamp(0.0, 1.0);
    }
    out
}
