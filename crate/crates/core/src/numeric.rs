//! Shared numerical routines.

/// Subinterval count used by every integral in the engine.
pub const SIMPSON_INTERVALS: usize = 200;

/// Composite Simpson's rule over `[a, b]` with an even number of
/// subintervals. `b < a` integrates backwards (negated area).
pub fn simpson<E, F>(f: F, a: f64, b: f64, intervals: usize) -> Result<f64, E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    debug_assert!(intervals >= 2 && intervals.is_multiple_of(2));
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / intervals as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

/// Component-wise Simpson integral of a vector-valued function.
pub fn simpson_vec<const N: usize, E, F>(f: F, a: f64, b: f64, intervals: usize) -> Result<[f64; N], E>
where
    F: Fn(f64) -> Result<[f64; N], E>,
{
    let mut acc = [0.0; N];
    if a == b {
        return Ok(acc);
    }
    let h = (b - a) / intervals as f64;
    for i in 0..=intervals {
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let x = if i == intervals { b } else { a + i as f64 * h };
        let v = f(x)?;
        for (s, c) in acc.iter_mut().zip(v) {
            *s += w * c;
        }
    }
    Ok(acc.map(|s| s * h / 3.0))
}
