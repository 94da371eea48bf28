//! Property-based invariants over randomized inputs.

use leo_mimo::channel::{build_channel, build_spacetime_channel, steering_vector, temporal_steering, upa_steering, ArrayConfig, UserState};
use leo_mimo::crowding::{max_load_of_users, Axis, BinAxis, BinGrid};
use leo_mimo::linalg::hermitian_deviation;
use leo_mimo::precoding::{gram, zf_rate, GramMatrix};
use leo_mimo::scheduler::{sds_select, select_from_gram};
use leo_mimo::spectral::min_eigenvalue;
use proptest::prelude::*;

fn user() -> impl Strategy<Value = UserState> {
    (-0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5, 0.1f64..3.0).prop_map(|(ux, uy, w, b)| UserState::at(ux, uy, w).with_gain(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_vectors_have_unit_norm(x in -10.0f64..10.0, m in 1usize..300, mx in 1usize..20, my in 1usize..20) {
        prop_assert!((steering_vector(x, m).unwrap().norm() - 1.0).abs() < 1e-12);
        prop_assert!((temporal_steering(x, m).unwrap().norm() - 1.0).abs() < 1e-12);
        prop_assert!((upa_steering(x, -x / 3.0, mx, my).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn structured_gram_matches_explicit(users in prop::collection::vec(user(), 1..12), mx in 1usize..9, my in 1usize..9, l in 1usize..6) {
        let array = ArrayConfig::new(if my == 1 { leo_mimo::channel::ArrayKind::Ula } else { leo_mimo::channel::ArrayKind::Upa }, mx, my).unwrap();
        let explicit = gram(&build_spacetime_channel(&users, &array, l).unwrap());
        let structured = GramMatrix::structured(&users, &array, l).unwrap();
        prop_assert_eq!(explicit.normalization(), structured.normalization());
        let diff = (explicit.entries() - structured.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12, "max entry difference {}", diff);
        prop_assert_eq!(hermitian_deviation(structured.entries()), 0.0);
        let lam = structured.eigenvalues();
        prop_assert!(lam[0] > -1e-10);
    }

    #[test]
    fn zf_rate_grows_with_power(users in prop::collection::vec(user(), 1..6), rho in 1e-2f64..1e4) {
        let array = ArrayConfig::upa(8, 8).unwrap();
        let g = gram(&build_channel(&users, &array).unwrap());
        let lo = zf_rate(&g, rho, 1.0);
        let hi = zf_rate(&g, 2.0 * rho, 1.0);
        prop_assert_eq!(lo.collapsed, hi.collapsed);
        prop_assert!(hi.sum_rate >= lo.sum_rate);
    }

    #[test]
    fn max_load_respects_pigeonhole(us in prop::collection::vec(-0.05f64..0.05, 1..200), bins in 1usize..20) {
        let grid = BinGrid::new(vec![BinAxis::centered(Axis::Ux, bins, 0.1 / bins as f64)]).unwrap();
        let users: Vec<UserState> = us.iter().map(|&u| UserState::at(u, 0.0, 0.0)).collect();
        let s = max_load_of_users(&grid, &users);
        prop_assert!(s.max_load >= s.pigeonhole());
        prop_assert!(s.max_load <= users.len());
    }

    #[test]
    fn selection_yields_orthonormal_basis(users in prop::collection::vec(user(), 1..30), k in 1usize..12, alpha in 0.05f64..=1.0) {
        let array = ArrayConfig::upa(4, 4).unwrap();
        let r = sds_select(&build_spacetime_channel(&users, &array, 3).unwrap(), k, alpha).unwrap();
        prop_assert!(r.selected.len() <= k.min(users.len()));
        let q = &r.basis;
        let err = (q.ad_mul(q) - leo_mimo::linalg::CMatrix::identity(q.ncols(), q.ncols())).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "orthonormality error {}", err);
        let mut sorted = r.selected.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), r.selected.len());
    }

    #[test]
    fn selected_set_is_better_conditioned_than_pool(users in prop::collection::vec(user(), 2..16), alpha in 0.1f64..=1.0) {
        let array = ArrayConfig::upa(4, 4).unwrap();
        let g = GramMatrix::structured(&users, &array, 3).unwrap();
        let sel = select_from_gram(&g, users.len(), alpha).unwrap();
        let lam_sel = min_eigenvalue(&g.submatrix(&sel)).unwrap();
        let lam_all = min_eigenvalue(&g).unwrap();
        prop_assert!(lam_all <= lam_sel + 1e-12);
    }
}
