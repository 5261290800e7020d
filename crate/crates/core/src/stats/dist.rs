use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

/// Beyond this many degrees of freedom the t tail is taken from the normal.
pub const NORMAL_APPROX_DF: f64 = 1000.0;

/// `P(|Z| > |z|)` for a standard normal `Z`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// `P(|T| > |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if df > NORMAL_APPROX_DF {
        return normal_two_sided_p(t);
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df must be positive");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}
