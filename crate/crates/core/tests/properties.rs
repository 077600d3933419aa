use std::f64::consts::{PI, TAU};

use ckc::chain::{
    diagonal_lengths, direction, endpoint_map, phi, prefix_sums, psi, ChainPrefixState,
    JointAngles, LinkLengths, Point3,
};
use ckc::closure::{close, joint_positions, verify};
use ckc::cube::{from_u, gamma, gamma_inverse, to_u, CubePoint, HypothesisCheck};
use ckc::diagonal::{
    decompose, membership_li_han, membership_zan_stein, reach_bounds, sample_diagonals,
    DiagonalSpace, DiagonalVector,
};
use ckc::permute::{map_diagonals, LinkPermutation};
use ckc::solver::{
    reconstruct, sample_from_solution, solve_joint, AngleSolutionSet, BetaSolutions,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn closable_links(min_n: usize, max_n: usize) -> impl Strategy<Value = LinkLengths> {
    prop::collection::vec(0.1f64..3.0, min_n..=max_n)
        .prop_filter_map("not closable", |a| LinkLengths::new(a).ok())
}

fn angles_for(n: usize) -> impl Strategy<Value = JointAngles> {
    prop::collection::vec((0.0..TAU, 0.0..=PI), n).prop_map(|v| {
        JointAngles::new(
            v.iter().map(|p| p.0).collect(),
            v.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    })
}

fn chain_and_angles() -> impl Strategy<Value = (LinkLengths, JointAngles)> {
    closable_links(3, 12).prop_flat_map(|l| {
        let n = l.len();
        (Just(l), angles_for(n - 1))
    })
}

/// Descending chains whose three largest links pairwise exceed half the total.
fn long_link_chain<R: Rng>(rng: &mut R, n: usize) -> LinkLengths {
    loop {
        let mut big: Vec<f64> = (0..3).map(|_| rng.random_range(1.0..2.0)).collect();
        big.sort_by(|a, b| b.total_cmp(a));
        let slack = big[1] + big[2] - big[0];
        let mut small: Vec<f64> = (0..n - 3)
            .map(|_| rng.random_range(0.0..1.0) * big[2].min(slack / (n - 3) as f64))
            .filter(|&x| x > 1e-3)
            .collect();
        if small.len() != n - 3 {
            continue;
        }
        small.sort_by(|a, b| b.total_cmp(a));
        big.extend(small);
        if let Ok(l) = LinkLengths::new(big) {
            if ckc::cube::has_three_long_links(&l) {
                return l;
            }
        }
    }
}

proptest! {
    #[test]
    fn squared_diagonal_matches_double_sum((links, angles) in chain_and_angles()) {
        let dirs: Vec<Point3> = angles.directions().collect();
        for k in 1..=angles.len() {
            let mut s = 0.0;
            for i in 0..k {
                for j in 0..k {
                    s += links.get(i + 1) * links.get(j + 1) * dirs[i].dot(dirs[j]);
                }
            }
            let f = endpoint_map(&links, &angles, k).unwrap();
            let scale = links.total().powi(2);
            prop_assert!((f.norm_sq() - s).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn diagonals_are_endpoint_norms((links, angles) in chain_and_angles()) {
        let d = diagonal_lengths(&links, &angles).unwrap();
        for k in 1..=angles.len() {
            let f = endpoint_map(&links, &angles, k).unwrap();
            prop_assert!((d.get(k) - f.norm()).abs() <= 1e-14 * links.total());
        }
        prop_assert!((d.get(1) - links.get(1)).abs() <= 1e-15 * links.get(1));
    }

    #[test]
    fn incremental_prefix_matches_batch((links, angles) in chain_and_angles()) {
        let batch = prefix_sums(&links, &angles).unwrap();
        let mut s = ChainPrefixState::origin();
        for (k, b) in batch.iter().enumerate() {
            let (a, be) = angles.get(k + 1);
            s = s.extended(links.get(k + 1), a, be);
            prop_assert_eq!(s.point(), b.point());
        }
    }

    #[test]
    fn reach_bounds_are_monotone(links in closable_links(3, 20)) {
        let b = reach_bounds(&links);
        for k in 1..links.len() - 1 {
            prop_assert!(b.max(k + 1) >= b.max(k));
            prop_assert!(b.clamped_min(k) <= b.max(k));
        }
    }

    #[test]
    fn sampled_diagonals_are_feasible(links in closable_links(3, 30), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = sample_diagonals(&links, &mut rng).unwrap();
        prop_assert!(membership_zan_stein(&links, &d, 0.0));
        prop_assert!(membership_li_han(&links, &d, 0.0));
        prop_assert!(decompose(&links).contains(&d, 0.0));
    }

    #[test]
    fn reconstruction_realizes_diagonals(links in closable_links(4, 15), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = sample_diagonals(&links, &mut rng).unwrap();
        let sc = reconstruct(&links, &d, None, &mut rng).unwrap();
        let got = diagonal_lengths(&links, &sc.angles).unwrap();
        for k in 1..links.len() {
            prop_assert!((got.get(k) - d.get(k)).abs() <= 1e-9 * links.total());
        }
    }

    #[test]
    fn closing_preserves_diagonals_and_edges(links in closable_links(4, 15), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = sample_diagonals(&links, &mut rng).unwrap();
        let sc = reconstruct(&links, &d, None, &mut rng).unwrap();
        let before = diagonal_lengths(&links, &sc.angles).unwrap();
        let closed = close(&links, &sc.angles).unwrap();
        let after = diagonal_lengths(&links, &closed.angles).unwrap();
        for k in 1..links.len() {
            prop_assert!((before.get(k) - after.get(k)).abs() <= 1e-12 * before.get(k).max(1.0));
        }
        let p = &closed.joints;
        for j in 1..links.len() {
            let a = links.get(j);
            prop_assert!((p[j].distance(p[j - 1]) - a).abs() <= 1e-10 * a);
        }
        prop_assert!(verify(&links, &closed.angles).unwrap().absolute < 1e-9 * links.total());
    }

    #[test]
    fn equal_links_are_balanced(n in 4usize..200, seed in any::<u64>()) {
        let links = LinkLengths::unit(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = sample_diagonals(&links, &mut rng).unwrap();
        let sc = reconstruct(&links, &d, None, &mut rng).unwrap();
        let closed = close(&links, &sc.angles).unwrap();
        let sum = ckc::closure::link_directions(&closed)
            .into_iter()
            .fold(Point3::ORIGIN, |a, v| a + v);
        prop_assert!(sum.norm() < 1e-9 * n as f64);
    }

    #[test]
    fn angle_equation_forms_agree(
        x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0,
        alpha in 0.0..TAU, beta in 0.0..=PI,
    ) {
        let prev = ChainPrefixState::at(x, y, z, 1);
        prop_assume!(x.hypot(y) > 1e-6);
        let ps = psi(alpha, &prev).unwrap();
        let r = ((alpha + phi(&prev).unwrap()).sin().powi(2) * (x * x + y * y) + z * z).sqrt();
        let lhs = (beta + ps).sin() * r;
        let rhs = direction(alpha, beta).dot(prev.point());
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn permutation_transport_is_feasible(links in closable_links(4, 10), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = sample_diagonals(&links, &mut rng).unwrap();
        let mut idx: Vec<usize> = (0..links.len()).collect();
        idx.shuffle(&mut rng);
        let sigma = LinkPermutation::new(idx).unwrap();
        let t = map_diagonals(&links, &sigma, &d, seed).unwrap();
        prop_assert!(membership_zan_stein(&t.links, &t.diagonals, 1e-12 * links.total()));
        prop_assert!(t.closure_gap <= 1e-9 * links.total());
    }

    #[test]
    fn identity_permutation_is_identity(links in closable_links(4, 10), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = sample_diagonals(&links, &mut rng).unwrap();
        let t = map_diagonals(&links, &LinkPermutation::identity(links.len()), &d, seed).unwrap();
        for (a, b) in t.diagonals.as_slice().iter().zip(d.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-10 * links.total().max(1.0));
        }
    }

    #[test]
    fn u_roundtrip(links in closable_links(4, 12), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = sample_diagonals(&links, &mut rng).unwrap();
        let back = from_u(&links, &to_u(&links, &d).unwrap()).unwrap();
        for (a, b) in back.as_slice().iter().zip(d.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-10 * links.total());
        }
    }
}

#[test]
fn inequality_systems_agree_on_box_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in [4usize, 5, 6, 7, 9] {
        for _ in 0..20 {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
            let Ok(links) = LinkLengths::new(a) else {
                continue;
            };
            let ds = DiagonalSpace::new(&links);
            let bx = ds.bounding_box();
            let dec = decompose(&links);
            for _ in 0..2000 {
                let v: Vec<f64> = bx
                    .iter()
                    .map(|iv| rng.random_range(iv.lo..=iv.hi))
                    .collect();
                let d = DiagonalVector::from_variable(&links, &v).unwrap();
                let zs = membership_zan_stein(&links, &d, 0.0);
                assert_eq!(zs, membership_li_han(&links, &d, 0.0), "{links} {v:?}");
                assert_eq!(zs, dec.contains(&d, 0.0));
            }
        }
    }
}

fn plane_fit(points: &[Point3]) -> (f64, f64) {
    let m = points.len() as f64;
    let c = points.iter().fold(Point3::ORIGIN, |a, &p| a + p) * (1.0 / m);
    let rows: Vec<f64> = points.iter().flat_map(|&p| (p - c).to_array()).collect();
    let mat = nalgebra::DMatrix::from_row_slice(points.len(), 3, &rows);
    let svd = mat.svd(false, true);
    let vt = svd.v_t.unwrap();
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let normal = Point3::new(vt[(imin, 0)], vt[(imin, 1)], vt[(imin, 2)]);
    let off = normal.dot(c);
    let plane = points
        .iter()
        .map(|p| (normal.dot(*p) - off).abs())
        .fold(0.0, f64::max);
    let center = normal * off;
    let radii: Vec<f64> = points.iter().map(|p| p.distance(center)).collect();
    let spread = radii.iter().cloned().fold(f64::MIN, f64::max)
        - radii.iter().cloned().fold(f64::MAX, f64::min);
    (plane, spread)
}

#[test]
fn joint_solutions_lie_on_circles() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    while checked < 40 {
        let links = LinkLengths::new((0..7).map(|_| rng.random_range(0.3..2.0)).collect());
        let Ok(links) = links else { continue };
        let d = sample_diagonals(&links, &mut rng).unwrap();
        let sc = reconstruct(&links, &d, None, &mut rng).unwrap();
        let k = rng.random_range(2..links.len());
        let prev = endpoint_map(&links, &sc.angles, k - 1).unwrap();
        let state = ChainPrefixState::at(prev.x, prev.y, prev.z, k - 1);
        let set = solve_joint(&links, k, &state, d.get(k - 1), d.get(k)).unwrap();
        if matches!(set, AngleSolutionSet::FullSphere) {
            continue;
        }
        let pts: Vec<Point3> = (0..200)
            .map(|_| {
                let s = sample_from_solution(&set, &mut rng);
                direction(s.alpha, s.beta)
            })
            .collect();
        let (plane, spread) = plane_fit(&pts);
        assert!(plane < 1e-9 && spread < 1e-9, "{plane} {spread} {set:?}");
        for p in &pts {
            let res = 2.0 * links.get(k) * p.dot(prev) + prev.norm_sq() - d.get(k).powi(2)
                + links.get(k).powi(2);
            assert!(res.abs() < 1e-9 * d.get(k).powi(2).max(1.0));
        }
        checked += 1;
    }
}

#[test]
fn beta_branch_count_follows_sign_of_d() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let (mut unique, mut double) = (0, 0);
    for _ in 0..2000 {
        let p = Point3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let a = rng.random_range(0.2..2.0);
        let lo = (p.norm() - a).abs();
        let lk = rng.random_range(lo..p.norm() + a);
        let links = LinkLengths::new(vec![p.norm(), a, lk]).unwrap();
        let state = ChainPrefixState::at(p.x, p.y, p.z, 1);
        let set = solve_joint(&links, 2, &state, p.norm(), lk).unwrap();
        let AngleSolutionSet::GenericCircle { d, alpha_set, .. } = set else {
            continue;
        };
        for _ in 0..20 {
            let alpha = alpha_set.at_fraction(rng.random_range(0.0..=1.0));
            match set.betas_for(alpha) {
                BetaSolutions::Two(..) if d <= 0.0 => panic!("two branches with D = {d}"),
                BetaSolutions::Two(..) => double += 1,
                BetaSolutions::One(_) => unique += 1,
                other => panic!("{other:?}"),
            }
        }
    }
    assert!(unique > 0 && double > 0);
}

#[test]
fn cube_image_and_surjectivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let check = HypothesisCheck::default();
    for _ in 0..30 {
        let n = rng.random_range(5..=12);
        let links = long_link_chain(&mut rng, n);
        for _ in 0..200 {
            let s = CubePoint::random(n - 3, &mut rng);
            let u = gamma(&links, &s, check).unwrap();
            let d = from_u(&links, &u).unwrap();
            assert!(membership_zan_stein(&links, &d, 1e-12 * links.total()));
            let d = sample_diagonals(&links, &mut rng).unwrap();
            let s = gamma_inverse(&links, &to_u(&links, &d).unwrap()).unwrap();
            assert!(s.as_slice().iter().all(|v| v.abs() <= 1.0));
        }
    }
}

#[test]
fn cube_faces_map_to_degenerate_triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let check = HypothesisCheck::default();
    for _ in 0..200 {
        let n = rng.random_range(5..=10);
        let links = long_link_chain(&mut rng, n);
        let mut s: Vec<f64> = (0..n - 3).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let j = rng.random_range(2..=n - 2);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        s[j - 2] = sign;
        let d = from_u(
            &links,
            &gamma(&links, &CubePoint::new(s).unwrap(), check).unwrap(),
        )
        .unwrap();
        let (l, up, a) = (d.get(j), d.get(j + 1), links.get(j + 1));
        let want = if sign > 0.0 { up + a } else { (up - a).abs() };
        assert!((l - want).abs() < 1e-10, "{l} {want}");
    }
}

#[test]
fn joint_positions_start_at_origin() {
    let links = LinkLengths::unit(6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let d = sample_diagonals(&links, &mut rng).unwrap();
    let sc = reconstruct(&links, &d, None, &mut rng).unwrap();
    let p = joint_positions(&links, &sc.angles).unwrap();
    assert_eq!(p.len(), 6);
    assert_eq!(p[0], Point3::ORIGIN);
    for (k, q) in p.iter().enumerate().skip(1) {
        assert!((q.norm() - d.get(k)).abs() < 1e-12);
    }
}
