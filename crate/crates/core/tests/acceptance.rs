//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the binary exits non-zero if any of them fails.

use std::f64::consts::PI;
use std::time::Instant;

use nevpick::constrained_hardy::h1_family_sweep;
use nevpick::finite_algebra::{
    assemble, build_algebra, compression_all, compression_sup, distance_to_ideal, kernel_direction, lattice_subspace,
    mask_of, members, np_gap, FiniteAlgebra, OptimizerOptions, DEFAULT_SINGULAR_TOL,
};
use nevpick::kernels::{gram_matrix, KernelSpec, Node};
use nevpick::npc::{complete_np_test, embed_drury_arveson};
use nevpick::numerics::{singular_values, svd, CMatrix, C64};
use nevpick::pick::{scalar_pick, InterpolationData};
use nevpick::schur::{boundary_sup, solve_classical};
use nevpick::search::{search_violations, Candidate, SearchParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn disk_point(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(0.0..2.0 * PI))
}

fn example_similarity() -> CMatrix {
    let rows: [[f64; 5]; 5] = [
        [3.0, 1.0, 1.0, 0.0, -1.0],
        [0.0, 1.0, -2.0, -1.0, 0.0],
        [-1.0, 0.0, -1.0, 1.0, -1.0],
        [-1.0, 1.0, 2.0, 1.0, -1.0],
        [1.0, 1.0, 3.0, 1.0, -2.0],
    ];
    CMatrix::from_fn(5, 5, |i, j| c(rows[i][j], 0.0))
}

fn example_element() -> Vec<C64> {
    [-2.0, -3.0, 7.0, 0.0, 0.0].iter().map(|&x| c(x, 0.0)).collect()
}

fn random_nonempty_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    loop {
        let e: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        if !e.is_empty() {
            return e;
        }
    }
}

/// Random similarity with condition number at most `max_cond`.
fn random_algebra(rng: &mut ChaCha8Rng, n: usize, max_cond: f64) -> FiniteAlgebra {
    loop {
        let s = CMatrix::from_fn(n, n, |_, _| gaussian(rng));
        let sv = singular_values(&s);
        if sv[n - 1] > 0.0 && sv[0] / sv[n - 1] <= max_cond {
            return build_algebra(&s, DEFAULT_SINGULAR_TOL).unwrap();
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let alg = build_algebra(&example_similarity(), DEFAULT_SINGULAR_TOL).unwrap();
    let rep = np_gap(&alg, &example_element(), mask_of(&[0, 1, 2]), &OptimizerOptions::default()).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let expected = [
        (vec![1, 2, 3], 9.0096),
        (vec![1, 2, 3, 4], 10.1306),
        (vec![1, 2, 3, 5], 7.4595),
        (vec![1, 2, 3, 4, 5], 10.6632),
    ];
    let mut ok = rep.per_sigma.len() == 4;
    let mut norms = Vec::new();
    for (sigma, value) in &expected {
        match rep.per_sigma.iter().find(|s| &s.sigma == sigma) {
            Some(s) => {
                ok &= (s.norm - value).abs() <= 1e-3;
                norms.push(format!("{:.6}", s.norm));
            }
            None => ok = false,
        }
    }
    ok &= (rep.distance - 11.9346).abs() <= 5e-3;
    ok &= rep.gap > 1.2;
    ok &= elapsed < 5.0;
    Outcome {
        pass: ok,
        detail: format!(
            "norms [{}], distance {:.7}, gap {:.6}, {:.2}s",
            norms.join(", "),
            rep.distance,
            rep.gap,
            elapsed
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_gap = 0.0_f64;
    let mut worst_dist = 0.0_f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=5);
        let g = CMatrix::from_fn(n, n, |_, _| gaussian(&mut rng));
        let u = svd(&g).u;
        let alg = build_algebra(&u, DEFAULT_SINGULAR_TOL).unwrap();
        let a: Vec<C64> = (0..n).map(|_| gaussian(&mut rng) * 2.0).collect();
        let e = random_nonempty_subset(&mut rng, n);
        let rep = np_gap(&alg, &a, mask_of(&e), &OptimizerOptions::default()).unwrap();
        let closed_form = e.iter().map(|&i| a[i].norm()).fold(0.0, f64::max);
        worst_gap = worst_gap.max(rep.gap.abs());
        worst_dist = worst_dist.max((rep.distance - closed_form).abs());
    }
    Outcome {
        pass: worst_gap <= 1e-7 && worst_dist <= 1e-8,
        detail: format!("max |gap| {worst_gap:.2e}, max distance error {worst_dist:.2e}"),
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..500 {
        let n = rng.random_range(2..=6);
        let alg = random_algebra(&mut rng, n, 1e4);
        let a: Vec<C64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let e = mask_of(&random_nonempty_subset(&mut rng, n));
        let sup = compression_sup(&alg, &a, e).unwrap().supremum;
        let dist = distance_to_ideal(&alg, &a, e, &OptimizerOptions::default()).unwrap().distance;
        let margin = dist - sup;
        worst = worst.min(margin);
        if margin < -1e-7 {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!("min(distance - sup) {worst:.3e}, {failures} exceptions"),
    }
}

fn blaschke(zeros: &[C64], unimodular: C64, z: C64) -> C64 {
    zeros
        .iter()
        .fold(unimodular, |acc, &a| acc * (z - a) / (c(1.0, 0.0) - a.conj() * z))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ok = true;
    let (mut worst_err, mut worst_sup, mut worst_pick) = (0.0_f64, 0.0_f64, f64::INFINITY);
    for _ in 0..100 {
        let degree = rng.random_range(1..=3);
        let zeros: Vec<C64> = (0..degree).map(|_| disk_point(&mut rng, 0.9)).collect();
        let unimodular = C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        let nodes: Vec<C64> = (0..3).map(|_| disk_point(&mut rng, 0.9)).collect();
        let targets: Vec<C64> = nodes.iter().map(|&z| blaschke(&zeros, unimodular, z)).collect();
        let data = InterpolationData::on_disk(&nodes, &targets).unwrap();
        let outcome = solve_classical(&data, 1e-10).unwrap();
        let pick = outcome.pick();
        worst_pick = worst_pick.min(pick.min_eigenvalue / (pick.tolerance / 1e-10));
        ok &= pick.is_psd;
        match outcome.interpolant() {
            Some(f) => {
                let err = data
                    .nodes()
                    .iter()
                    .zip(&targets)
                    .map(|(z, w)| (f.evaluate(z.coordinates()[0]) - w).norm())
                    .fold(0.0, f64::max);
                worst_err = worst_err.max(err);
                worst_sup = worst_sup.max(boundary_sup(f, 4096));
            }
            None => ok = false,
        }
    }
    ok &= worst_err <= 1e-8 && worst_sup <= 1.0 + 1e-6;

    let mut unsolvable = 0;
    let mut drawn = 0;
    while drawn < 100 {
        let nodes: Vec<C64> = (0..3).map(|_| disk_point(&mut rng, 0.9)).collect();
        let targets: Vec<C64> = (0..3).map(|_| disk_point(&mut rng, 1.0)).collect();
        let data = InterpolationData::on_disk(&nodes, &targets).unwrap();
        let gram = gram_matrix(&KernelSpec::Szego, data.nodes()).unwrap();
        let report = scalar_pick(&data, &gram, 1e-6).unwrap();
        if report.verdict.is_psd {
            continue;
        }
        drawn += 1;
        if solve_classical(&data, 1e-10).unwrap().is_unsolvable() {
            unsolvable += 1;
        }
    }
    ok &= unsolvable == 100;
    Outcome {
        pass: ok,
        detail: format!(
            "solvable: min scaled Pick eig {worst_pick:.2e}, node error {worst_err:.2e}, boundary sup {worst_sup:.9}; unsolvable {unsolvable}/100"
        ),
    }
}

fn ball_node(rng: &mut ChaCha8Rng, d: usize) -> Node {
    loop {
        let v: Vec<C64> = (0..d).map(|_| disk_point(rng, 0.95)).collect();
        let node = Node::new(v).unwrap();
        if node.norm() < 0.95 {
            return node;
        }
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = true;
    let mut worst_eig = f64::INFINITY;
    let mut worst_residual = 0.0_f64;
    for (spec, d) in [(KernelSpec::Szego, 1), (KernelSpec::DruryArveson { dim: 2 }, 2)] {
        for _ in 0..50 {
            let size = rng.random_range(1..=6);
            let nodes: Vec<Node> = (0..size).map(|_| ball_node(&mut rng, d)).collect();
            let gram = gram_matrix(&spec, &nodes).unwrap();
            let rep = complete_np_test(&gram, 0, 1e-10).unwrap();
            worst_eig = worst_eig.min(rep.verdict.min_eigenvalue);
            ok &= rep.verdict.min_eigenvalue >= -1e-10;
            match embed_drury_arveson(&gram, 0, 1e-10) {
                Ok(e) => {
                    worst_residual = worst_residual.max(e.residual);
                    ok &= e.residual <= 1e-9;
                }
                Err(_) => ok = false,
            }
        }
    }
    let bergman_nodes = [Node::real(0.0), Node::real(0.5), Node::scalar(c(0.0, 0.5))];
    let gram = gram_matrix(&KernelSpec::Bergman, &bergman_nodes).unwrap();
    let bergman = complete_np_test(&gram, 0, 1e-10).unwrap().verdict.min_eigenvalue;
    ok &= bergman < -1e-6;
    Outcome {
        pass: ok,
        detail: format!(
            "Szego/DA min eig {worst_eig:.2e}, max residual {worst_residual:.2e}; Bergman min eig {bergman:.6}"
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let constant = gaussian(&mut rng);
        let coeffs: Vec<C64> = (0..rng.random_range(1..=4)).map(|_| gaussian(&mut rng)).collect();
        let raw = |z: C64| constant + z * z * coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a);
        let sup = (0..4096)
            .map(|k| raw(C64::from_polar(1.0, 2.0 * PI * k as f64 / 4096.0)).norm())
            .fold(0.0, f64::max);
        let scale = 1.0 / (sup * (1.0 + 1e-3));
        let f = |z: C64| raw(z) * scale;
        let check = (0..4096)
            .map(|k| f(C64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / 4096.0)).norm())
            .fold(0.0, f64::max);
        ok &= check <= 1.0;
        let nodes: Vec<C64> = (0..rng.random_range(2..=5)).map(|_| disk_point(&mut rng, 0.9)).collect();
        let targets: Vec<C64> = nodes.iter().map(|&z| f(z)).collect();
        let data = InterpolationData::on_disk(&nodes, &targets).unwrap();
        let rep = h1_family_sweep(&data, 32, 1e-7).unwrap();
        worst = worst.min(rep.worst.min_eigenvalue / (rep.tolerance / 1e-7));
        ok &= rep.verdict;
    }
    Outcome {
        pass: ok,
        detail: format!("min scaled family eigenvalue {worst:.2e}"),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_relation = 0.0_f64;
    let mut worst_sup = 0.0_f64;
    for _ in 0..60 {
        let n = rng.random_range(2..=5);
        let alg = random_algebra(&mut rng, n, 1e4);
        let a: Vec<C64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        let am = assemble(&alg, &a).unwrap();
        for sigma in 1..(1u64 << n) {
            let proj = lattice_subspace(&alg, sigma).unwrap().projector();
            for i in members(sigma, n) {
                let k = kernel_direction(&alg, sigma, i).unwrap();
                let residual = (&proj * am.adjoint() * &k - &k * a[i].conj()).norm();
                worst_relation = worst_relation.max(residual);
            }
        }
        let e = mask_of(&random_nonempty_subset(&mut rng, n));
        let all = compression_all(&alg, &a, e).unwrap().supremum;
        let containing = compression_sup(&alg, &a, e).unwrap().supremum;
        worst_sup = worst_sup.max((all - containing).abs());
    }
    Outcome {
        pass: worst_relation <= 1e-8 && worst_sup <= 1e-9,
        detail: format!("eigen relation residual {worst_relation:.2e}, sup disagreement {worst_sup:.2e}"),
    }
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, e_size) in [(2, 1), (3, 1), (3, 2)] {
        let mut p = SearchParams::new(n, e_size);
        p.budget = 2000;
        p.threshold = 1e-4;
        p.seed = 8;
        let out = search_violations(&p).unwrap();
        ok &= out.violations.is_empty();
        parts.push(format!(
            "n={n},|E|={e_size}: {} hits, max gap {:.1e}, {} failures",
            out.violations.len(),
            out.max_gap,
            out.failures
        ));
    }
    let mut p = SearchParams::new(5, 3);
    p.budget = 1;
    p.inject.push(Candidate {
        s: example_similarity(),
        a: example_element(),
        e: vec![0, 1, 2],
    });
    let out = search_violations(&p).unwrap();
    let injected = out.violations.iter().find(|v| v.injected == Some(0)).map(|v| v.report.gap);
    ok &= injected.is_some_and(|g| g > 1.2);
    parts.push(format!("injected gap {:.6}", injected.unwrap_or(f64::NAN)));
    Outcome {
        pass: ok,
        detail: format!("{} ({:.1}s)", parts.join("; "), started.elapsed().as_secs_f64()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("worked 5x5 example", criterion_1),
        ("unitary similarity exactness", criterion_2),
        ("distance dominates compressions", criterion_3),
        ("classical round trip", criterion_4),
        ("complete NP criterion", criterion_5),
        ("constrained family necessity", criterion_6),
        ("eigenvector and maximality invariants", criterion_7),
        ("search regression", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}]: {} ({})",
            k + 1,
            name,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
