//! Axis-aligned facet geometry: exact Hausdorff measures of intersections.
//!
//! A facet with centre `z` and orientation `l` is the set
//! `{x : x[l] = z[l], |x[m] - z[m]| <= b for m != l}`: a `(d-1)`-cube of side
//! `2b` normal to `e_l`. Facets extend outside the window `[0,b]^d` and are
//! never clipped. Intersections of facets with pairwise distinct orientations
//! are boxes whose measure factorizes over axes, which is what
//! [`intersection_measure`] computes in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One facet: centre in the window plus the index of its normal direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    /// Centre `z`, one coordinate per axis, each in `[0, b]`.
    pub center: Vec<f64>,
    /// 1-based index `l` of the normal direction `e_l`, in `1..=d`.
    pub orientation: usize,
}

impl Facet {
    pub fn new(center: Vec<f64>, orientation: usize) -> Self {
        Facet { center, orientation }
    }

    /// 0-based axis fixed by this facet.
    pub fn axis(&self) -> usize {
        self.orientation - 1
    }
}

/// Intensity profile `chi` on the window, either constant or a product of
/// per-axis piecewise constant densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChiProfile {
    Constant { value: f64 },
    ProductPwc { axes: Vec<AxisPwc> },
}

/// Piecewise constant density along one axis: `values[i]` holds on the i-th
/// piece of `[0,b]` cut at the interior `breakpoints`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisPwc {
    /// Strictly increasing interior breakpoints, each in `(0, b)`.
    pub breakpoints: Vec<f64>,
    /// One value per piece (`breakpoints.len() + 1` entries), all positive.
    pub values: Vec<f64>,
}

impl AxisPwc {
    /// Unnormalized mass of this axis factor over `[0,b]`.
    pub fn mass(&self, b: f64) -> f64 {
        let mut total = 0.0;
        let mut lo = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let hi = if i < self.breakpoints.len() { self.breakpoints[i] } else { b };
            total += v * (hi - lo);
            lo = hi;
        }
        total
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let mut piece = 0;
        while piece < self.breakpoints.len() && x >= self.breakpoints[piece] {
            piece += 1;
        }
        self.values[piece]
    }

    /// Inverse CDF of the normalized density; `u` in `[0,1)`.
    pub fn quantile(&self, u: f64, b: f64) -> f64 {
        let mut remaining = u * self.mass(b);
        let mut lo = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let hi = if i < self.breakpoints.len() { self.breakpoints[i] } else { b };
            let piece_mass = v * (hi - lo);
            if remaining < piece_mass || i + 1 == self.values.len() {
                return (lo + remaining / v).min(hi);
            }
            remaining -= piece_mass;
            lo = hi;
        }
        b
    }

    fn validate(&self, b: f64) -> Result<()> {
        if self.values.len() != self.breakpoints.len() + 1 {
            return Err(Error::Validation(format!(
                "chi axis needs breakpoints+1 values, got {} values for {} breakpoints",
                self.values.len(),
                self.breakpoints.len()
            )));
        }
        if self.values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Validation("chi piece values must be positive".into()));
        }
        let mut prev = 0.0;
        for &x in &self.breakpoints {
            if !(x > prev) || x >= b {
                return Err(Error::Validation(
                    "chi breakpoints must be strictly increasing inside (0, b)".into(),
                ));
            }
            prev = x;
        }
        Ok(())
    }
}

impl ChiProfile {
    /// `Some(v)` when the profile is a constant `v` on the window.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            ChiProfile::Constant { value } => Some(*value),
            ChiProfile::ProductPwc { .. } => None,
        }
    }

    pub fn value_at(&self, z: &[f64]) -> f64 {
        match self {
            ChiProfile::Constant { value } => *value,
            ChiProfile::ProductPwc { axes } => {
                z.iter().zip(axes).map(|(&x, ax)| ax.value_at(x)).product()
            }
        }
    }

    /// Draws a centre from the normalized density `chi / T` by per-axis
    /// inverse CDF (the profile is a product over axes).
    pub fn sample_center<R: rand::Rng + ?Sized>(&self, b: f64, d: usize, rng: &mut R) -> Vec<f64> {
        match self {
            ChiProfile::Constant { .. } => (0..d).map(|_| b * rng.gen::<f64>()).collect(),
            ChiProfile::ProductPwc { axes } => {
                axes.iter().map(|ax| ax.quantile(rng.gen::<f64>(), b)).collect()
            }
        }
    }

    /// `T = integral of chi over [0,b]^d`.
    pub fn total_mass(&self, b: f64, d: usize) -> f64 {
        match self {
            ChiProfile::Constant { value } => value * b.powi(d as i32),
            ChiProfile::ProductPwc { axes } => axes.iter().map(|ax| ax.mass(b)).product(),
        }
    }

    fn validate(&self, b: f64, d: usize) -> Result<()> {
        match self {
            ChiProfile::Constant { value } => {
                if !(*value > 0.0) || !value.is_finite() {
                    return Err(Error::Validation("chi constant must be positive".into()));
                }
            }
            ChiProfile::ProductPwc { axes } => {
                if axes.len() != d {
                    return Err(Error::Validation(format!(
                        "chi needs one axis profile per dimension: got {} for d={}",
                        axes.len(),
                        d
                    )));
                }
                for ax in axes {
                    ax.validate(b)?;
                }
            }
        }
        Ok(())
    }
}

/// Full model description: window, intensity, interaction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Ambient dimension, `>= 2`.
    pub d: usize,
    /// Window side and facet half-side.
    pub b: f64,
    /// Intensity multiplier, `>= 1`.
    pub a: f64,
    /// Interaction coefficients `nu_1..nu_d`.
    pub nu: Vec<f64>,
    /// Submodel order: when set, only `nu_c` (and the absorbable `nu_1`) may
    /// be nonzero. `None` for general interaction vectors.
    #[serde(default)]
    pub c: Option<usize>,
    pub chi: ChiProfile,
}

impl ModelParams {
    /// Convenience constructor for the constant-intensity submodel used
    /// throughout the tests: `chi == 1`, only `nu_c` active.
    pub fn submodel(d: usize, b: f64, a: f64, c: usize, nu_c: f64) -> Self {
        let mut nu = vec![0.0; d];
        nu[c - 1] = nu_c;
        ModelParams { d, b, a, nu, c: Some(c), chi: ChiProfile::Constant { value: 1.0 } }
    }

    /// Poisson reference: all interactions off.
    pub fn poisson(d: usize, b: f64, a: f64) -> Self {
        ModelParams { d, b, a, nu: vec![0.0; d], c: None, chi: ChiProfile::Constant { value: 1.0 } }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Validation(format!("d must be >= 2, got {}", self.d)));
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::Validation(format!("b must be positive, got {}", self.b)));
        }
        if !(self.a >= 1.0) || !self.a.is_finite() {
            return Err(Error::Validation(format!("a must be >= 1, got {}", self.a)));
        }
        if self.nu.len() != self.d {
            return Err(Error::Validation(format!(
                "nu must have d={} entries, got {}",
                self.d,
                self.nu.len()
            )));
        }
        for (i, &v) in self.nu.iter().enumerate().skip(1) {
            if v > 0.0 {
                return Err(Error::Validation(format!(
                    "nu_{} = {} > 0: the density exp(sum nu_i G_i) is not integrable \
                     against the Poisson reference (the partition sum diverges); \
                     nu_i <= 0 is required for all i >= 2",
                    i + 1,
                    v
                )));
            }
            if !v.is_finite() {
                return Err(Error::Validation(format!("nu_{} must be finite", i + 1)));
            }
        }
        if let Some(c) = self.c {
            if c < 2 || c > self.d {
                return Err(Error::Validation(format!(
                    "submodel order c must lie in 2..=d, got c={} with d={}",
                    c, self.d
                )));
            }
            for (i, &v) in self.nu.iter().enumerate() {
                if i + 1 != c && i != 0 && v != 0.0 {
                    return Err(Error::Validation(format!(
                        "submodel of order {} requires nu_{} = 0, got {}",
                        c,
                        i + 1,
                        v
                    )));
                }
            }
        }
        if !(self.total_mass() > 0.0) {
            return Err(Error::Validation("total chi mass T must be positive".into()));
        }
        self.chi.validate(self.b, self.d)
    }

    /// `T = integral of chi` over the window.
    pub fn total_mass(&self) -> f64 {
        self.chi.total_mass(self.b, self.d)
    }

    /// `(2b)^(d-1)`: the `G_1` contribution of any single facet.
    pub fn facet_measure(&self) -> f64 {
        (2.0 * self.b).powi(self.d as i32 - 1)
    }

    /// Intensity multiplier with `nu_1` absorbed: each facet carries the
    /// constant energy `nu_1 (2b)^(d-1)`, which acts as Poisson thinning.
    pub fn a_effective(&self) -> f64 {
        self.a * (self.nu[0] * self.facet_measure()).exp()
    }

    /// Order driving the asymptotics: the explicit submodel order if its
    /// coefficient is active, otherwise the minimal `i >= 2` with `nu_i < 0`
    /// (general vectors share that submodel's limits). `None` means the
    /// process is the Poisson reference.
    pub fn effective_c(&self) -> Option<usize> {
        if let Some(c) = self.c {
            if self.nu[c - 1] < 0.0 {
                return Some(c);
            }
            return None;
        }
        self.nu.iter().enumerate().skip(1).find(|(_, &v)| v < 0.0).map(|(i, _)| i + 1)
    }
}

/// `H^(d-j)` of the common intersection of `j` facets, exactly.
///
/// Zero when two facets share an orientation (only non-parallel facets
/// intersect; coincident parallel facets are a null event under the
/// continuous centre law) or when some fixed coordinate falls outside
/// another facet's extent. Otherwise the intersection is a box over the
/// free axes and its volume is the product of the per-axis extent overlaps.
/// Boundary touching counts as intersecting (closed intervals).
pub fn intersection_measure(facets: &[Facet], params: &ModelParams) -> Result<f64> {
    let d = params.d;
    let j = facets.len();
    if j < 1 || j > d {
        return Err(Error::InvalidArgument(format!(
            "intersection_measure needs between 1 and d={} facets, got {}",
            d, j
        )));
    }
    for f in facets {
        if f.center.len() != d {
            return Err(Error::InvalidArgument(format!(
                "facet centre has {} coordinates, model has d={}",
                f.center.len(),
                d
            )));
        }
        if f.orientation < 1 || f.orientation > d {
            return Err(Error::InvalidArgument(format!(
                "facet orientation {} outside 1..={}",
                f.orientation, d
            )));
        }
    }
    let refs: Vec<&Facet> = facets.iter().collect();
    Ok(measure_of(&refs, d, params.b))
}

/// Validated fast path shared with the U-statistic iterators.
pub(crate) fn measure_of(facets: &[&Facet], d: usize, b: f64) -> f64 {
    debug_assert!(!facets.is_empty() && facets.len() <= d && d <= 64);
    let mut seen: u64 = 0;
    for f in facets {
        let bit = 1u64 << f.axis();
        if seen & bit != 0 {
            return 0.0;
        }
        seen |= bit;
    }
    // Feasibility on fixed axes: facet i pins x[l_i] = z_i[l_i], which must
    // lie inside every other facet's extent on that axis.
    for f in facets {
        let l = f.axis();
        let v = f.center[l];
        for g in facets {
            if (v - g.center[l]).abs() > b {
                return 0.0;
            }
        }
    }
    let mut measure = 1.0;
    for m in 0..d {
        if seen & (1u64 << m) != 0 {
            continue;
        }
        measure *= axis_overlap(facets, m, b);
        if measure == 0.0 {
            return 0.0;
        }
    }
    measure
}

/// Length of the common extent overlap `2b - range(centres)` on one free
/// axis, clamped at zero.
pub(crate) fn axis_overlap(facets: &[&Facet], axis: usize, b: f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for f in facets {
        let z = f.center[axis];
        lo = lo.min(z);
        hi = hi.max(z);
    }
    (2.0 * b - (hi - lo)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_params(d: usize) -> ModelParams {
        ModelParams::poisson(d, 1.0, 5.0)
    }

    fn f(center: &[f64], orientation: usize) -> Facet {
        Facet::new(center.to_vec(), orientation)
    }

    #[test]
    fn single_facet_is_a_segment_of_length_two() {
        let p = unit_params(2);
        let m = intersection_measure(&[f(&[0.5, 0.5], 1)], &p).unwrap();
        assert_eq!(m, 2.0);
    }

    #[test]
    fn crossing_pair_in_the_plane_is_a_point() {
        let p = unit_params(2);
        let m = intersection_measure(&[f(&[0.2, 0.7], 1), f(&[0.9, 0.1], 2)], &p).unwrap();
        assert_eq!(m, 1.0);
    }

    #[test]
    fn parallel_facets_contribute_zero() {
        let p = unit_params(2);
        let m = intersection_measure(&[f(&[0.2, 0.7], 1), f(&[0.9, 0.1], 1)], &p).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn plane_pair_in_three_dimensions_overlaps_on_the_free_axis() {
        let p = unit_params(3);
        let m =
            intersection_measure(&[f(&[0.0, 0.0, 0.0], 1), f(&[0.5, 0.5, 0.5], 2)], &p).unwrap();
        assert_eq!(m, 1.5);
    }

    #[test]
    fn boundary_touching_counts_as_intersecting() {
        let p = unit_params(2);
        // |z1[0] - z2[0]| = 1 = b exactly: closed-interval feasibility keeps it.
        let m = intersection_measure(&[f(&[0.0, 0.5], 1), f(&[1.0, 0.5], 2)], &p).unwrap();
        assert_eq!(m, 1.0);
    }

    #[test]
    fn full_orientation_tuple_has_counting_measure_one() {
        let p = unit_params(3);
        let m = intersection_measure(
            &[f(&[0.1, 0.2, 0.3], 1), f(&[0.4, 0.5, 0.6], 2), f(&[0.7, 0.8, 0.9], 3)],
            &p,
        )
        .unwrap();
        assert_eq!(m, 1.0);
    }

    #[test]
    fn argument_errors_are_reported() {
        let p = unit_params(2);
        assert!(matches!(intersection_measure(&[], &p), Err(Error::InvalidArgument(_))));
        let too_many = [f(&[0.1, 0.1], 1), f(&[0.2, 0.2], 2), f(&[0.3, 0.3], 1)];
        assert!(matches!(intersection_measure(&too_many, &p), Err(Error::InvalidArgument(_))));
        let wrong_dim = [f(&[0.1, 0.1, 0.1], 1)];
        assert!(matches!(intersection_measure(&wrong_dim, &p), Err(Error::InvalidArgument(_))));
        let bad_orientation = [f(&[0.1, 0.1], 3)];
        assert!(matches!(
            intersection_measure(&bad_orientation, &p),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn validation_rejects_positive_interaction() {
        let mut p = ModelParams::submodel(2, 1.0, 5.0, 2, -0.5);
        p.nu[1] = 0.3;
        let err = p.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("not integrable"), "message should cite non-integrability: {msg}");
    }

    #[test]
    fn validation_rejects_mixed_submodel_vector() {
        let mut p = ModelParams::submodel(3, 1.0, 5.0, 3, -0.5);
        p.nu[1] = -0.1;
        assert!(p.validate().is_err());
        p.c = None;
        assert!(p.validate().is_ok());
        assert_eq!(p.effective_c(), Some(2));
    }

    #[test]
    fn effective_c_treats_zero_coefficient_as_poisson() {
        let p = ModelParams::submodel(2, 1.0, 5.0, 2, 0.0);
        assert!(p.validate().is_ok());
        assert_eq!(p.effective_c(), None);
    }

    #[test]
    fn chi_product_mass_and_quantile_agree() {
        let ax = AxisPwc { breakpoints: vec![0.25, 0.5], values: vec![1.0, 3.0, 0.5] };
        assert!((ax.mass(1.0) - (0.25 + 0.75 + 0.25)).abs() < 1e-12);
        // Quantile at the mass fraction of the first piece lands on its edge.
        let u = 0.25 / ax.mass(1.0);
        assert!((ax.quantile(u, 1.0) - 0.25).abs() < 1e-12);
        assert_eq!(ax.quantile(0.0, 1.0), 0.0);
        assert!(ax.quantile(0.999_999, 1.0) <= 1.0);
    }

    fn random_tuple(rng: &mut ChaCha8Rng, d: usize, j: usize) -> Vec<Facet> {
        let mut orientations: Vec<usize> = (1..=d).collect();
        orientations.shuffle(rng);
        (0..j)
            .map(|i| {
                let center = (0..d).map(|_| rng.gen::<f64>()).collect();
                Facet::new(center, orientations[i])
            })
            .collect()
    }

    #[test]
    fn window_bounds_hold_on_random_distinct_orientation_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=4usize {
            let p = unit_params(d);
            for j in 1..=d {
                for _ in 0..200 {
                    let tuple = random_tuple(&mut rng, d, j);
                    let m = intersection_measure(&tuple, &p).unwrap();
                    let lo = p.b.powi((d - j) as i32);
                    let hi = (2.0 * p.b).powi((d - j) as i32);
                    assert!(m >= lo - 1e-12 && m <= hi + 1e-12, "H={m} outside [{lo},{hi}]");
                }
            }
        }
    }

    #[test]
    fn fresh_orientation_facet_never_increases_axis_overlaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = 4;
        for _ in 0..200 {
            let tuple = random_tuple(&mut rng, d, 3);
            let base: Vec<&Facet> = tuple[..2].iter().collect();
            let extended: Vec<&Facet> = tuple.iter().collect();
            for axis in 0..d {
                if extended.iter().any(|f| f.axis() == axis) {
                    continue;
                }
                assert!(axis_overlap(&extended, axis, 1.0) <= axis_overlap(&base, axis, 1.0));
            }
        }
    }

    /// Hit-or-miss oracle: sample the free coordinates uniformly from the
    /// first facet's extent and count membership in all facets. Independent
    /// of the min/max arithmetic in the implementation.
    pub(crate) fn hit_or_miss(
        facets: &[Facet],
        d: usize,
        b: f64,
        n: usize,
        rng: &mut ChaCha8Rng,
    ) -> (f64, f64) {
        let fixed: Vec<usize> = facets.iter().map(|f| f.axis()).collect();
        let free: Vec<usize> = (0..d).filter(|m| !fixed.contains(m)).collect();
        let box_measure = (2.0 * b).powi(free.len() as i32);
        let mut hits = 0usize;
        let mut x = vec![0.0; d];
        for _ in 0..n {
            for f in facets {
                x[f.axis()] = f.center[f.axis()];
            }
            for &m in &free {
                x[m] = facets[0].center[m] - b + 2.0 * b * rng.gen::<f64>();
            }
            let inside = facets.iter().all(|f| {
                (0..d).all(|m| m == f.axis() || (x[m] - f.center[m]).abs() <= b)
            });
            if inside {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n as f64;
        let est = box_measure * p_hat;
        let se = box_measure * (p_hat * (1.0 - p_hat) / n as f64).sqrt();
        (est, se)
    }

    #[test]
    fn monte_carlo_oracle_agrees_with_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 2..=3usize {
            let p = unit_params(d);
            for _ in 0..20 {
                let j = rng.gen_range(1..=d);
                let tuple = random_tuple(&mut rng, d, j);
                let exact = intersection_measure(&tuple, &p).unwrap();
                let (est, se) = hit_or_miss(&tuple, d, p.b, 100_000, &mut rng);
                assert!(
                    (est - exact).abs() <= 3.0 * se + 1e-9,
                    "MC {est} +- {se} vs exact {exact}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn measure_is_permutation_invariant(
            seed in 0u64..1000,
            j in 1usize..=3,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 3;
            let p = unit_params(d);
            let mut tuple = random_tuple(&mut rng, d, j);
            let before = intersection_measure(&tuple, &p).unwrap();
            tuple.shuffle(&mut rng);
            let after = intersection_measure(&tuple, &p).unwrap();
            prop_assert_eq!(before, after);
        }

        #[test]
        fn extending_by_a_fresh_orientation_divides_out_at_most_one_extent(
            seed in 0u64..1000,
        ) {
            // In-window overlaps are at least b, so dropping the new fixed
            // axis and shrinking the others can lose at most a factor 1/b
            // relative to the j-fold measure.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 3;
            let p = unit_params(d);
            let tuple = random_tuple(&mut rng, d, 2);
            let h2 = intersection_measure(&tuple[..1], &p).unwrap();
            let h3 = intersection_measure(&tuple, &p).unwrap();
            prop_assert!(h3 <= h2 / p.b + 1e-12);
        }
    }
}
