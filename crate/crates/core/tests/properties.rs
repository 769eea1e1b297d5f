use nevpick::constrained_hardy::{h1_gram, FamilyParameter};
use nevpick::kernels::{bergman_derivative_kernel, gram_matrix, kernel_eval, KernelSpec, Node};
use nevpick::npc::{complete_np_test, embed_drury_arveson};
use nevpick::numerics::{max_abs_entry, psd_check, psd_check_relative, HermitianMatrix, C64};
use nevpick::pick::{family_pick, scalar_pick, InterpolationData};
use nevpick::schur::solve_classical;
use proptest::prelude::*;

fn disk(radius: f64) -> impl Strategy<Value = C64> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn distinct(points: &[C64]) -> bool {
    points
        .iter()
        .enumerate()
        .all(|(i, z)| points[..i].iter().all(|w| (z - w).norm() > 1e-3))
}

fn disk_nodes(max: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(disk(0.9), 1..=max).prop_filter("distinct nodes", |v| distinct(v))
}

fn ball_nodes(max: usize) -> impl Strategy<Value = Vec<Node>> {
    prop::collection::vec((disk(0.67), disk(0.67)), 1..=max)
        .prop_map(|v| v.into_iter().map(|(a, b)| Node::new(vec![a, b]).unwrap()).collect::<Vec<_>>())
        .prop_filter("distinct nodes", |v| {
            v.iter()
                .enumerate()
                .all(|(i, x)| v[..i].iter().all(|y| (0..2).any(|k| (x.coordinates()[k] - y.coordinates()[k]).norm() > 1e-3)))
        })
}

fn kernels() -> Vec<KernelSpec> {
    vec![
        KernelSpec::Szego,
        KernelSpec::Bergman,
        KernelSpec::weighted_bergman(0.5),
        KernelSpec::weighted_bergman(3.0),
    ]
}

fn mobius(a: C64, z: C64) -> C64 {
    (z - a) / (C64::new(1.0, 0.0) - a.conj() * z)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn disk_kernels_are_positive_and_conjugate_symmetric(zs in disk_nodes(8), w in disk(0.9)) {
        let nodes: Vec<Node> = zs.iter().map(|&z| Node::scalar(z)).collect();
        for spec in kernels() {
            let g = gram_matrix(&spec, &nodes).unwrap();
            prop_assert!(psd_check_relative(&g, 1e-10).is_psd, "{spec:?}");
            let (x, y) = (Node::scalar(zs[0]), Node::scalar(w));
            let forward = kernel_eval(&spec, &x, &y).unwrap();
            let back = kernel_eval(&spec, &y, &x).unwrap();
            prop_assert!((forward - back.conj()).norm() <= 1e-13 * forward.norm());
        }
    }

    #[test]
    fn ball_kernel_is_positive(nodes in ball_nodes(8)) {
        let g = gram_matrix(&KernelSpec::DruryArveson { dim: 2 }, &nodes).unwrap();
        prop_assert!(psd_check_relative(&g, 1e-10).is_psd);
    }

    #[test]
    fn derivative_kernel_of_order_zero_is_bergman(l in disk(0.9), z in disk(0.9)) {
        let (l, z) = (Node::scalar(l), Node::scalar(z));
        prop_assert_eq!(
            bergman_derivative_kernel(&l, 0, &z).unwrap(),
            kernel_eval(&KernelSpec::Bergman, &z, &l).unwrap()
        );
    }

    #[test]
    fn schur_verdict_matches_pick_verdict(
        zs in prop::collection::vec(disk(0.9), 2..=4),
        ws in prop::collection::vec(disk(1.0), 4),
    ) {
        prop_assume!(distinct(&zs));
        let data = InterpolationData::on_disk(&zs, &ws[..zs.len()]).unwrap();
        let gram = gram_matrix(&KernelSpec::Szego, data.nodes()).unwrap();
        let pick = scalar_pick(&data, &gram, 1e-6).unwrap();
        prop_assume!(pick.verdict.min_eigenvalue.abs() > pick.verdict.tolerance);
        let outcome = solve_classical(&data, 1e-9).unwrap();
        prop_assert_eq!(outcome.is_unsolvable(), !pick.verdict.is_psd);
    }

    #[test]
    fn mobius_change_of_variable_keeps_the_verdict(
        zs in prop::collection::vec(disk(0.8), 2..=4),
        ws in prop::collection::vec(disk(1.0), 4),
        a in disk(0.6),
    ) {
        prop_assume!(distinct(&zs));
        let ws = &ws[..zs.len()];
        let moved: Vec<C64> = zs.iter().map(|&z| mobius(a, z)).collect();
        let base = solve_classical(&InterpolationData::on_disk(&zs, ws).unwrap(), 1e-6).unwrap();
        let other = solve_classical(&InterpolationData::on_disk(&moved, ws).unwrap(), 1e-6).unwrap();
        let band = |o: &nevpick::schur::SchurOutcome| o.pick().min_eigenvalue.abs() <= 10.0 * o.pick().tolerance;
        prop_assume!(!band(&base) && !band(&other));
        prop_assert_eq!(base.is_unsolvable(), other.is_unsolvable());
    }

    #[test]
    fn family_kernels_are_positive_and_phase_blind(
        zs in disk_nodes(6),
        ws in prop::collection::vec(disk(1.0), 6),
        theta in 0.0..std::f64::consts::FRAC_PI_2,
        phi in 0.0..std::f64::consts::TAU,
        rot in 0.0..std::f64::consts::TAU,
    ) {
        let nodes: Vec<Node> = zs.iter().map(|&z| Node::scalar(z)).collect();
        let p = FamilyParameter::from_angles(theta, phi);
        let g = h1_gram(&p, &nodes).unwrap();
        prop_assert!(psd_check_relative(&g, 1e-10).is_psd);

        let u = C64::from_polar(1.0, rot);
        let q = FamilyParameter::new(p.alpha * u, p.beta * u).unwrap();
        let h = h1_gram(&q, &nodes).unwrap();
        let data = InterpolationData::on_disk(&zs, &ws[..zs.len()]).unwrap();
        let a = family_pick(&data, &g, "", 1e-9).unwrap();
        let b = family_pick(&data, &h, "", 1e-9).unwrap();
        prop_assert!((a.verdict.min_eigenvalue - b.verdict.min_eigenvalue).abs() <= 1e-12 * a.matrix.scale());
    }

    #[test]
    fn complete_np_embeddings_reconstruct_the_gram(nodes in ball_nodes(6)) {
        let g = gram_matrix(&KernelSpec::DruryArveson { dim: 2 }, &nodes).unwrap();
        for base in 0..nodes.len() {
            prop_assert!(complete_np_test(&g, base, 1e-10).unwrap().verdict.is_psd);
            let e = embed_drury_arveson(&g, base, 1e-10).unwrap();
            for i in 0..nodes.len() {
                for j in 0..nodes.len() {
                    let inner: C64 = e.b[j].iter().zip(&e.b[i]).map(|(x, y)| x * y.conj()).sum();
                    let lhs = g.get(i, j) * (C64::new(1.0, 0.0) - inner.conj());
                    prop_assert!((lhs - e.delta[i].conj() * e.delta[j]).norm() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn rescaled_grams_keep_the_complete_np_verdict(
        zs in disk_nodes(5),
        scales in prop::collection::vec((0.2..5.0f64, 0.0..std::f64::consts::TAU), 5),
    ) {
        let nodes: Vec<Node> = zs.iter().map(|&z| Node::scalar(z)).collect();
        let cs: Vec<C64> = scales.iter().map(|&(r, t)| C64::from_polar(r, t)).collect();
        for spec in [KernelSpec::Szego, KernelSpec::Bergman] {
            let g = gram_matrix(&spec, &nodes).unwrap();
            let scaled = HermitianMatrix::from_fn(g.dim(), |i, j| cs[i].conj() * cs[j] * g.get(i, j)).unwrap();
            let a = complete_np_test(&g, 0, 1e-10).unwrap();
            let b = complete_np_test(&scaled, 0, 1e-10).unwrap();
            // F itself is unchanged by the rescaling
            let diff = max_abs_entry(&(a.f_matrix.matrix() - b.f_matrix.matrix()));
            prop_assert!(diff <= 1e-9);
            prop_assert_eq!(a.verdict.is_psd, psd_check(&b.f_matrix, 1e-10).is_psd);
        }
    }
}
