use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::chi2_cdf;

/// Quantile of the chi-square distribution with `dof` degrees of freedom,
/// found by bisection on the CDF.
pub fn chi2_quantile<T: Scalar>(dof: usize, q: T) -> Result<T> {
    if !(q > T::zero() && q < T::one()) {
        return Err(Error::InvalidProbability(q.as_f64()));
    }
    if dof == 0 {
        return Err(Error::ZeroDimension);
    }
    let k = T::from_count(dof);
    let mut lo = T::zero();
    let mut hi = k.max(T::one());
    while chi2_cdf(hi, k) < q {
        lo = hi;
        hi = hi + hi;
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(4.0));
    for _ in 0..400 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if chi2_cdf(mid, k) < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * hi {
            break;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}
