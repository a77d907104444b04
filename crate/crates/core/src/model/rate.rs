use crate::error::{Error, Result};

/// Relative tolerance for every `>=` feasibility comparison.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

/// `lhs >= rhs` up to [`FEASIBILITY_RTOL`] relative to the larger magnitude.
#[inline]
pub fn approx_ge(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - FEASIBILITY_RTOL * lhs.abs().max(rhs.abs())
}

/// SINR a packet of `bits` needs to go through one RB of `bandwidth_hz` in a
/// unit-length slot: `2^(bits / W) - 1`.
pub fn rate_threshold(bits: f64, bandwidth_hz: f64) -> f64 {
    (bits / bandwidth_hz).exp2() - 1.0
}

/// Achievable rate in bits/s of the member at `member` in an RB whose members
/// are listed in SIC order (ascending gain). Only members before `member`
/// interfere.
pub fn compute_rate(
    gains: &[f64],
    powers: &[f64],
    member: usize,
    bandwidth_hz: f64,
) -> Result<f64> {
    if gains.len() != powers.len() {
        return Err(Error::Dimension(format!(
            "{} gains but {} powers",
            gains.len(),
            powers.len()
        )));
    }
    if member >= gains.len() {
        return Err(Error::Dimension(format!(
            "member index {member} out of range for a group of {}",
            gains.len()
        )));
    }
    let interference: f64 = gains[..member]
        .iter()
        .zip(&powers[..member])
        .map(|(g, p)| g * p)
        .sum();
    let sinr = powers[member] * gains[member] / (1.0 + interference);
    Ok(bandwidth_hz * sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Checks that every member of a group in SIC order clears its SINR threshold:
/// `budget_i * g_i >= b_i * (1 + sum over lower members of budget * gain)`.
pub fn group_feasible(gains: &[f64], budgets: &[f64], thresholds: &[f64]) -> bool {
    debug_assert_eq!(gains.len(), budgets.len());
    debug_assert_eq!(gains.len(), thresholds.len());
    let mut interference = 0.0;
    for ((g, p), b) in gains.iter().zip(budgets).zip(thresholds) {
        let received = p * g;
        if !approx_ge(received, b * (1.0 + interference)) {
            return false;
        }
        interference += received;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_member_rate() {
        let r = compute_rate(&[6.0], &[1.0], 0, 1.0).unwrap();
        assert!((r - 7f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn zero_power_has_zero_rate() {
        assert_eq!(compute_rate(&[3.0, 5.0], &[1.0, 0.0], 1, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn two_member_rates() {
        let gains = [1.0, 3.0];
        let powers = [1.0, 1.0];
        let lower = compute_rate(&gains, &powers, 0, 1.0).unwrap();
        let upper = compute_rate(&gains, &powers, 1, 1.0).unwrap();
        assert!((lower - 1.0).abs() < 1e-12);
        assert!((upper - 2.5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn rate_dimension_mismatch() {
        assert!(compute_rate(&[1.0, 2.0], &[1.0], 0, 1.0).is_err());
        assert!(compute_rate(&[1.0], &[1.0], 1, 1.0).is_err());
    }

    #[test]
    fn feasibility_examples() {
        assert!(group_feasible(&[], &[], &[]));
        assert!(group_feasible(&[1.0, 3.0], &[1.0, 1.0], &[1.0, 1.0]));
        assert!(!group_feasible(&[1.0, 1.5], &[1.0, 1.0], &[1.0, 1.0]));
    }

    #[test]
    fn threshold_matches_rate() {
        let b = rate_threshold(100.0, 20.0);
        assert!((b - 31.0).abs() < 1e-12);
        let r = compute_rate(&[b], &[1.0], 0, 20.0).unwrap();
        assert!((r - 100.0).abs() < 1e-9);
    }

    #[test]
    fn tolerance_absorbs_rounding_at_equality() {
        let b = rate_threshold(3.0, 1.0);
        assert!(approx_ge(7.0 * (1.0 - 1e-12), b));
        assert!(!approx_ge(7.0 * (1.0 - 1e-6), b));
    }

    fn group() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
        prop::collection::vec((0.01f64..50.0, 0.0f64..2.0, 0.0f64..3.0), 0..8).prop_map(|mut v| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        })
    }

    proptest! {
        #[test]
        fn subsets_of_feasible_groups_are_feasible(members in group(), mask in any::<u8>()) {
            let gains: Vec<f64> = members.iter().map(|m| m.0).collect();
            let budgets: Vec<f64> = members.iter().map(|m| m.1).collect();
            let thresholds: Vec<f64> = members.iter().map(|m| m.2).collect();
            prop_assume!(group_feasible(&gains, &budgets, &thresholds));
            let keep: Vec<usize> = (0..members.len()).filter(|i| mask >> i & 1 == 1).collect();
            let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
            prop_assert!(group_feasible(&pick(&gains), &pick(&budgets), &pick(&thresholds)));
        }

        #[test]
        fn rate_monotone_in_own_and_lower_power(
            g_low in 0.1f64..10.0, g_up in 0.1f64..10.0,
            p_low in 0.1f64..5.0, p_up in 0.1f64..5.0, delta in 0.01f64..2.0,
        ) {
            let (g_low, g_up) = if g_low <= g_up { (g_low, g_up) } else { (g_up, g_low) };
            let base = compute_rate(&[g_low, g_up], &[p_low, p_up], 1, 1.0).unwrap();
            let louder_self = compute_rate(&[g_low, g_up], &[p_low, p_up + delta], 1, 1.0).unwrap();
            let louder_below = compute_rate(&[g_low, g_up], &[p_low + delta, p_up], 1, 1.0).unwrap();
            prop_assert!(louder_self > base);
            prop_assert!(louder_below < base);
        }

        #[test]
        fn silent_members_do_not_interfere(gains in prop::collection::vec(0.1f64..10.0, 2..6), p in 0.1f64..3.0) {
            let mut gains = gains;
            gains.sort_by(f64::total_cmp);
            let n = gains.len();
            let mut powers = vec![0.0; n];
            powers[n - 1] = p;
            let shared = compute_rate(&gains, &powers, n - 1, 1.0).unwrap();
            let alone = compute_rate(&gains[n - 1..], &[p], 0, 1.0).unwrap();
            prop_assert_eq!(shared, alone);
            for i in 0..n - 1 {
                prop_assert_eq!(compute_rate(&gains, &powers, i, 1.0).unwrap(), 0.0);
            }
        }
    }
}
