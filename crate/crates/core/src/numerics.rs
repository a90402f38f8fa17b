//! Scalar root finding and adaptive quadrature.
//!
//! Two workhorses live here. `find_root` solves f(x) = 0 on a sign-changing
//! bracket with a safeguarded secant/bisection hybrid; `integrate` evaluates
//! one-dimensional integrals with an adaptive 15-point Gauss-Kronrod rule.
//! Both report failures through [`NumericsError`] instead of panicking, since
//! callers feed them user-supplied channel parameters.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NumericsError {
    #[error("no sign change over [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("no convergence after {max_iter} iterations (last interval [{lo}, {hi}])")]
    NoConvergence { max_iter: usize, lo: f64, hi: f64 },
    #[error("bracket expansion exhausted after {tries} doublings from [{lo}, {hi}]")]
    RangeExhausted { tries: usize, lo: f64, hi: f64 },
    #[error("function returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("quadrature error estimate {estimate:e} above tolerance {tol:e} after {subdivisions} subdivisions")]
    QuadratureStalled { estimate: f64, tol: f64, subdivisions: usize },
}

/// Sign-changing interval handed to [`find_root`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        Bracket { lo, hi }
    }
}

/// Convergence targets shared by the iterative routines.
///
/// `rel` is measured against the magnitude of the current estimate, `abs` is
/// an absolute floor for quantities that may legitimately approach zero.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-12, abs: 1e-300, max_iter: 200 }
    }
}

impl Tolerance {
    pub fn with_rel(rel: f64) -> Self {
        Tolerance { rel, ..Self::default() }
    }

    fn met(&self, lo: f64, hi: f64) -> bool {
        let width = hi - lo;
        let scale = lo.abs().max(hi.abs());
        width <= self.abs || width <= self.rel * scale
    }
}

/// Solve f(x) = 0 on a bracket where f changes sign.
///
/// Secant steps are attempted first and accepted only if they land strictly
/// inside the current bracket; otherwise the step falls back to bisection, so
/// the interval is guaranteed to shrink and the worst case is plain bisection.
/// Returns the midpoint of the final interval.
pub fn find_root<F>(mut f: F, bracket: Bracket, tol: Tolerance) -> Result<f64, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let Bracket { mut lo, mut hi } = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::BadInterval { lo, hi });
    }
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if !f_lo.is_finite() {
        return Err(NumericsError::NonFinite { x: lo });
    }
    if !f_hi.is_finite() {
        return Err(NumericsError::NonFinite { x: hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(NumericsError::NoSignChange { lo, hi, f_lo, f_hi });
    }

    // On convex or concave stretches plain secant updates only one end and
    // stalls; whenever some iteration fails to shrink the bracket decently, a
    // bisection step is forced, so shrinkage stays geometric in the worst
    // case while secant still supplies superlinear steps where it can.
    let mut step = |lo: &mut f64, hi: &mut f64, f_lo: &mut f64, f_hi: &mut f64, x: f64| {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(NumericsError::NonFinite { x });
        }
        if fx != 0.0 && fx.signum() == f_lo.signum() {
            *lo = x;
            *f_lo = fx;
        } else {
            *hi = x;
            *f_hi = fx;
        }
        Ok(fx)
    };
    for _ in 0..tol.max_iter {
        if tol.met(lo, hi) {
            return Ok(0.5 * (lo + hi));
        }
        let width = hi - lo;
        let secant = lo - f_lo * width / (f_hi - f_lo);
        let x = if secant.is_finite() && secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };
        if step(&mut lo, &mut hi, &mut f_lo, &mut f_hi, x)? == 0.0 {
            return Ok(x);
        }
        if hi - lo > 0.6 * width {
            let mid = 0.5 * (lo + hi);
            if step(&mut lo, &mut hi, &mut f_lo, &mut f_hi, mid)? == 0.0 {
                return Ok(mid);
            }
        }
    }
    if tol.met(lo, hi) {
        return Ok(0.5 * (lo + hi));
    }
    Err(NumericsError::NoConvergence { max_iter: tol.max_iter, lo, hi })
}

/// Grow a sign-changing bracket for a monotonically decreasing function.
///
/// Starting from a positive seed, the guess is doubled while f stays positive
/// and halved while it stays negative, which suits Lagrange-multiplier
/// searches where f(x) = budget_used(x) - budget is decreasing in x.
pub fn expand_bracket<F>(mut f: F, seed: f64, max_doublings: usize) -> Result<Bracket, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    assert!(seed > 0.0 && seed.is_finite(), "bracket seed must be positive and finite");
    let f0 = f(seed);
    if !f0.is_finite() {
        return Err(NumericsError::NonFinite { x: seed });
    }
    if f0 == 0.0 {
        // Degenerate but valid: return a tiny bracket around the seed.
        return Ok(Bracket::new(seed * 0.999, seed * 1.001));
    }
    let grow = f0 > 0.0; // decreasing f: positive value means the root is above
    let mut prev = seed;
    let mut x = seed;
    for tries in 1..=max_doublings {
        x = if grow { x * 2.0 } else { x * 0.5 };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(NumericsError::NonFinite { x });
        }
        if fx == 0.0 || fx.signum() != f0.signum() {
            return Ok(if grow { Bracket::new(prev, x) } else { Bracket::new(x, prev) });
        }
        prev = x;
        if tries == max_doublings {
            return Err(NumericsError::RangeExhausted { tries, lo: seed.min(x), hi: seed.max(x) });
        }
    }
    unreachable!("loop either returns or errors on the final try");
}

// ---- adaptive Gauss-Kronrod quadrature ----

// 15-point Kronrod nodes on [-1, 1] (symmetric; only the non-negative half is
// stored) with the embedded 7-point Gauss rule on the odd-indexed nodes.
const KRONROD_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7-K15 evaluation over [a, b]: returns (kronrod, |kronrod - gauss|).
fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), NumericsError>
where
    F: FnMut(f64) -> f64,
{
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&node, &wk)) in KRONROD_NODES.iter().zip(&KRONROD_WEIGHTS).enumerate() {
        let (ya, yb) = if node == 0.0 {
            let y = f(center);
            (y, 0.0)
        } else {
            (f(center - half * node), f(center + half * node))
        };
        if !ya.is_finite() || !yb.is_finite() {
            let x = if ya.is_finite() { center + half * node } else { center - half * node };
            return Err(NumericsError::NonFinite { x });
        }
        let pair = ya + yb;
        kronrod += wk * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    kronrod *= half;
    gauss *= half;
    Ok((kronrod, (kronrod - gauss).abs()))
}

/// Integrate f over [a, b] to a relative tolerance.
///
/// Globally adaptive: the panel with the largest error estimate is split
/// until the summed estimate drops below `rel_tol * |integral|` (with a tiny
/// absolute floor so integrals near zero terminate). Endpoints are never
/// evaluated, so integrands with removable endpoint singularities — the shape
/// every spectral integral here has — are safe as long as interior values
/// stay finite.
pub fn integrate<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64, NumericsError>
where
    F: FnMut(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(NumericsError::BadInterval { lo: a, hi: b });
    }
    const MAX_PANELS: usize = 4000;
    let abs_floor = 1e-305;

    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        error: f64,
    }

    let (value, error) = gk15(&mut f, a, b)?;
    let mut panels = vec![Panel { a, b, value, error }];
    let mut subdivisions = 0usize;

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if err <= rel_tol * total.abs() + abs_floor {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(NumericsError::QuadratureStalled {
                estimate: err,
                tol: rel_tol * total.abs(),
                subdivisions,
            });
        }
        // Split the worst panel.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("panel list is never empty");
        let Panel { a: pa, b: pb, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Interval already at floating-point resolution: accept its value
            // and stop counting its error against the budget.
            let (value, _) = gk15(&mut f, pa, pb)?;
            panels.push(Panel { a: pa, b: pb, value, error: 0.0 });
            continue;
        }
        let (v1, e1) = gk15(&mut f, pa, mid)?;
        let (v2, e2) = gk15(&mut f, mid, pb)?;
        panels.push(Panel { a: pa, b: mid, value: v1, error: e1 });
        panels.push(Panel { a: mid, b: pb, value: v2, error: e2 });
        subdivisions += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn root_of_cubic_matches_reference() {
        // x^3 - x - 2 has a single real root; reference value computed with
        // 60-digit arithmetic.
        let root = find_root(|x| x * x * x - x - 2.0, Bracket::new(1.0, 2.0), Tolerance::default())
            .unwrap();
        assert!(
            (root - 1.521379706804567569604081).abs() < 1e-12,
            "root = {root}, expected 1.5213797068045676"
        );
    }

    #[test]
    fn root_handles_exact_hit_at_endpoint() {
        let root = find_root(|x| x - 1.0, Bracket::new(1.0, 2.0), Tolerance::default()).unwrap();
        assert_eq!(root, 1.0);
    }

    #[test]
    fn root_rejects_same_sign_bracket() {
        let err = find_root(|x| x * x + 1.0, Bracket::new(-1.0, 1.0), Tolerance::default())
            .unwrap_err();
        assert!(matches!(err, NumericsError::NoSignChange { .. }), "got {err:?}");
    }

    #[test]
    fn root_rejects_inverted_interval() {
        let err =
            find_root(|x| x, Bracket::new(2.0, 1.0), Tolerance::default()).unwrap_err();
        assert!(matches!(err, NumericsError::BadInterval { .. }), "got {err:?}");
    }

    #[test]
    fn expand_bracket_walks_up_and_down() {
        // Decreasing function with root at 100: seed far below.
        let b = expand_bracket(|x| 100.0 - x, 1.0, 60).unwrap();
        assert!(b.lo < 100.0 && b.hi > 100.0, "bracket {b:?} misses 100");
        // Seed far above the root at 0.01.
        let b = expand_bracket(|x| 0.01 - x, 50.0, 60).unwrap();
        assert!(b.lo < 0.01 && b.hi > 0.01, "bracket {b:?} misses 0.01");
    }

    #[test]
    fn expand_bracket_reports_exhaustion() {
        let err = expand_bracket(|_| 1.0, 1.0, 10).unwrap_err();
        assert!(matches!(err, NumericsError::RangeExhausted { tries: 10, .. }), "got {err:?}");
    }

    #[test]
    fn quadrature_polynomial_is_near_exact() {
        // K15 integrates degree <= 22 exactly; x^5 over [0, 2] = 32/3.
        let v = integrate(|x| x.powi(5), 0.0, 2.0, 1e-13).unwrap();
        assert!((v - 32.0 / 3.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn quadrature_planck_tail_matches_reference() {
        // int_0^1 (1/x) / (e^(1/x) - 1) dx, essentially flat at x = 1 and
        // zero to all orders at x = 0; 60-digit reference value.
        let v = integrate(
            |x| {
                let e = 1.0 / x;
                if e > 700.0 {
                    0.0
                } else {
                    1.0 / (x * e.exp_m1())
                }
            },
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!(
            (v - 0.286792430949297340724719).abs() < 1e-12,
            "got {v}, expected 0.28679243094929734"
        );
    }

    #[test]
    fn quadrature_flags_divergent_integrand() {
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(
            matches!(err, NumericsError::QuadratureStalled { .. } | NumericsError::NonFinite { .. }),
            "got {err:?}"
        );
    }

    proptest! {
        #[test]
        fn root_is_inside_bracket_and_small(offset in 0.1f64..10.0, scale in 0.5f64..4.0) {
            // f(x) = scale * (x - offset) on [0, 20] always brackets offset.
            let f = |x: f64| scale * (x - offset);
            let root = find_root(f, Bracket::new(0.0, 20.0), Tolerance::default()).unwrap();
            prop_assert!((root - offset).abs() < 1e-9 * offset.max(1.0));
        }

        #[test]
        fn quadrature_is_additive_over_split(split in 0.2f64..0.8) {
            let f = |x: f64| (3.0 * x).sin() + x * x;
            let whole = integrate(f, 0.0, 1.0, 1e-12).unwrap();
            let left = integrate(f, 0.0, split, 1e-12).unwrap();
            let right = integrate(f, split, 1.0, 1e-12).unwrap();
            prop_assert!((whole - (left + right)).abs() < 1e-10);
        }
    }
}
