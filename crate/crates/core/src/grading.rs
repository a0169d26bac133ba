//! The single grading convention used throughout the crate.
//!
//! A twist `e` of a graded module is `M(e)_d = M_{e + d}`. Consequently a
//! monomial `z^m` is a section of the twisted stratum sheaf `O_K(e)` in degree
//! `d` exactly when `m = e + d` satisfies the chart sign pattern:
//!
//! * `m_i = 0` for `i ∈ K` (the stratum kills those coordinates),
//! * `m_i ≥ 0` for `i` in the chart face but not in `K`,
//! * `m_i` arbitrary for coordinates inverted on the chart.
//!
//! The free module `S(-p)` has its generator in degree `p`, so the stratum
//! sheaf labelled by a pair `(I, p)` is `O_I(-p)`, and
//! `Hom(O_I(x), O_J(y))` is assembled from `O_{I∪J}(y - x + χ_S)`.

/// Exponent of the monomial that sits in degree `degree` of a sheaf twisted by `twist`.
#[inline]
pub fn section_exponent(twist: &[i64], degree: &[i64]) -> Vec<i64> {
    twist.iter().zip(degree).map(|(e, d)| e + d).collect()
}

/// Twist of the stratum sheaf `O_{I,p}`: `-p`.
#[inline]
pub fn pair_twist(p: &[i64]) -> Vec<i64> {
    p.iter().map(|x| -x).collect()
}

/// Twist of `Hom(O_K(source), O_L(target))` before Koszul corrections.
#[inline]
pub fn hom_twist(source: &[i64], target: &[i64]) -> Vec<i64> {
    target.iter().zip(source).map(|(t, s)| t - s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_of_shifted_free_module_sits_in_degree_p() {
        // S(-p): the constant monomial z^0 lives in degree p.
        let p = [2, -1];
        let twist = pair_twist(&p);
        assert_eq!(section_exponent(&twist, &p), vec![0, 0]);
    }
}
