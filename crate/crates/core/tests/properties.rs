use flexassembly_core::linalg::{skew, Mat};
use flexassembly_core::linss::{
    channels, freq_response, h2_norm, hinf_norm, interconnect, invert_channels, is_stable, lft_upper, FrequencyGrid,
    StateSpace,
};
use flexassembly_core::modal::{build_lattice, clamped_free_modes, modal_reduce, LatticeParams, TileLayout};
use flexassembly_core::multibody::titop_two_port;
use flexassembly_core::pathopt::{shortest_path, SearchMode};
use flexassembly_core::robot::{arm_spatial_mass, arm_two_port, quintic, quintic_accel, quintic_rate, ArmGeometry, JointVector};
use flexassembly_core::robust::mu_real_repeated_on;
use nalgebra::{SymmetricEigen, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_a(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let mut a = Mat::zeros(n, n);
    let mut k = 0;
    while k < n {
        if k + 1 < n && rng.gen_bool(0.6) {
            let w: f64 = rng.gen_range(0.1..10.0);
            let xi: f64 = rng.gen_range(0.01..0.5);
            a[(k, k + 1)] = 1.0;
            a[(k + 1, k)] = -w * w;
            a[(k + 1, k + 1)] = -2.0 * xi * w;
            k += 2;
        } else {
            a[(k, k)] = -rng.gen_range(0.1..5.0);
            k += 1;
        }
    }
    let t = Mat::identity(n, n) + Mat::from_fn(n, n, |_, _| rng.gen_range(-0.3..0.3));
    let ti = t.clone().try_inverse().unwrap();
    &t * a * ti
}

fn random_sys(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize, with_d: bool) -> StateSpace {
    let a = random_a(rng, n);
    let b = Mat::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
    let c = Mat::from_fn(p, n, |_, _| rng.gen_range(-1.0..1.0));
    let d = if with_d {
        Mat::from_fn(p, m, |_, _| rng.gen_range(-1.0..1.0))
    } else {
        Mat::zeros(p, m)
    };
    StateSpace::new(a, b, c, d, channels(&[("u", m)]), channels(&[("y", p)])).unwrap()
}

fn probe() -> FrequencyGrid {
    FrequencyGrid::log_space(0.01, 100.0, 60).unwrap()
}

fn max_deviation(a: &StateSpace, b: &StateSpace) -> f64 {
    let g = probe();
    let (ra, rb) = (freq_response(a, &g).unwrap(), freq_response(b, &g).unwrap());
    ra.values
        .iter()
        .zip(&rb.values)
        .map(|(x, y)| (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max) / (1.0 + x.iter().map(|z| z.norm()).fold(0.0, f64::max)))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_grouping_keeps_response(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<StateSpace> = (0..3).map(|_| random_sys(&mut rng, 3, 1, 1, true)).collect();
        let ab = interconnect(&s[..2], &[(0, "y", 1, "u")], &[(0, "u")], &[(1, "y")]).unwrap();
        let left = interconnect(&[ab, s[2].clone()], &[(0, "y", 1, "u")], &[(0, "u")], &[(1, "y")]).unwrap();
        let bc = interconnect(&s[1..], &[(0, "y", 1, "u")], &[(0, "u")], &[(1, "y")]).unwrap();
        let right = interconnect(&[s[0].clone(), bc], &[(0, "y", 1, "u")], &[(0, "u")], &[(1, "y")]).unwrap();
        prop_assert!(max_deviation(&left, &right) < 1e-8);
    }

    #[test]
    fn double_inversion_is_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_sys(&mut rng, 4, 2, 2, true);
        // keep the feedthrough well conditioned
        let d = s.d().clone() + Mat::identity(2, 2) * 3.0;
        s = StateSpace::new(s.a().clone(), s.b().clone(), s.c().clone(), d, channels(&[("u", 2)]), channels(&[("y", 2)])).unwrap();
        let (inv, _) = invert_channels(&s, &["u"], &["y"]).unwrap();
        let (back, _) = invert_channels(&inv, &["y"], &["u"]).unwrap();
        prop_assert!(max_deviation(&s, &back) < 1e-8);
    }

    #[test]
    fn hinf_bounds_every_probe(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..8);
        let with_d = rng.gen_bool(0.5);
        let s = random_sys(&mut rng, n, 2, 2, with_d);
        let h = hinf_norm(&s).unwrap();
        let fr = freq_response(&s, &probe()).unwrap();
        for v in fr.sigma_max() {
            prop_assert!(v <= h * (1.0 + 1e-9));
        }
    }

    #[test]
    fn h2_similarity_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_sys(&mut rng, 5, 2, 2, false);
        let t = Mat::identity(5, 5) + Mat::from_fn(5, 5, |_, _| rng.gen_range(-0.4..0.4));
        let a = h2_norm(&s).unwrap();
        let b = h2_norm(&s.similarity(&t).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn lft_at_zero_drops_channels(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_sys(&mut rng, 4, 3, 3, true);
        let named = StateSpace::new(
            s.a().clone(), s.b().clone(), s.c().clone(), s.d().clone(),
            channels(&[("u", 2), ("w", 1)]), channels(&[("y", 2), ("z", 1)]),
        ).unwrap();
        let cl = lft_upper(&named, 0.0, "w", "z").unwrap();
        prop_assert!(!cl.has_input("w") && !cl.has_output("z"));
        prop_assert!(max_deviation(&cl, &named.select(&["u"], &["y"]).unwrap()) < 1e-12);
    }

    #[test]
    fn skew_is_antisymmetric(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
        let s = skew(&Vector3::new(x, y, z));
        prop_assert_eq!(s.transpose(), -s);
    }

    #[test]
    fn quintic_profile_properties(t in 0.0..1.0f64, dt in 0.0..1.0f64) {
        let h = 1e-6;
        let t2 = (t + dt).min(1.0);
        prop_assert!(quintic(t2) >= quintic(t));
        if t > h && t < 1.0 - h {
            let fd = (quintic(t + h) - quintic(t - h)) / (2.0 * h);
            prop_assert!((fd - quintic_rate(t)).abs() < 1e-8);
            let fd2 = (quintic_rate(t + h) - quintic_rate(t - h)) / (2.0 * h);
            prop_assert!((fd2 - quintic_accel(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn arm_mass_block_is_passive(q in proptest::array::uniform5(-3.0..3.0f64)) {
        let g = ArmGeometry::table_default();
        let q = JointVector::new(q).unwrap();
        let s = arm_two_port(&g, &q, false).unwrap();
        let r_w = s.output_range("W_J0").unwrap();
        let r_x = s.input_range("xdd_J0").unwrap();
        let block = -s.d().view((r_w.start, r_x.start), (6, 6)).into_owned();
        prop_assert!((&block - block.transpose()).amax() < 1e-9);
        let e = SymmetricEigen::new(block.clone()).eigenvalues;
        prop_assert!(e.min() > -1e-9);
        let m = arm_spatial_mass(&g, &q).unwrap();
        prop_assert!((block - Mat::from_fn(6, 6, |i, j| m[(i, j)])).amax() < 1e-9);
    }

    #[test]
    fn dijkstra_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=9);
        let mut w = Mat::from_element(n, n, f64::INFINITY);
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.gen_bool(0.35) {
                    w[(i, j)] = rng.gen_range(0.0..10.0f64).round();
                }
            }
        }
        let best = exhaustive(&w, 0, n - 1);
        match shortest_path(&w, 0, n - 1, SearchMode::Dijkstra) {
            Ok(p) => {
                let best = best.expect("path exists");
                prop_assert!((p.weight - best).abs() < 1e-12);
            }
            Err(_) => prop_assert!(best.is_none()),
        }
    }

    #[test]
    fn mu_lower_is_a_certified_margin(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..6);
        let s = random_sys(&mut rng, n, 2, 2, false);
        let named = StateSpace::new(
            s.a().clone(), s.b().clone(), s.c().clone(), s.d().clone(),
            channels(&[("w", 2)]), channels(&[("z", 2)]),
        ).unwrap();
        let r = mu_real_repeated_on(&named, 20.0, "w", "z").unwrap();
        prop_assert!(r.mu_lower <= r.mu_upper * (1.0 + 1e-9));
        let bound = if r.mu_lower > 0.0 { 1.0 / r.mu_lower } else { 20.0 };
        for k in 0..20 {
            let d = bound * (-0.999 + 1.998 * k as f64 / 19.0);
            let cl = lft_upper(&named, d, "w", "z").unwrap();
            prop_assert!(is_stable(&cl).0, "unstable at delta = {} below 1/mu = {}", d, bound);
        }
    }

    #[test]
    fn lattice_mass_and_modal_completeness(len in 1usize..6) {
        let layout = TileLayout::band(len);
        let p = LatticeParams::default();
        let model = build_lattice(&layout, &p).unwrap();
        prop_assert!((model.total_mass() - p.tile_mass * len as f64).abs() < 1e-9 * p.tile_mass);
        let all = model.n_dofs() - model.clamped_dofs.len();
        let body = modal_reduce(&model, &Vector3::zeros(), 1, all, 0.005).unwrap();
        let gap = body.d_p() - body.l_p.transpose() * &body.l_p;
        let gap = Mat::from_fn(6, 6, |i, j| gap[(i, j)]);
        prop_assert!(gap.amax() < 1e-8 * body.d_p().amax());
        let few = modal_reduce(&model, &Vector3::zeros(), 1, 3.min(all), 0.005).unwrap();
        let r = few.residual_mass();
        prop_assert!(SymmetricEigen::new(0.5 * (&r + r.transpose())).eigenvalues.min() > -1e-9);
    }
}

fn exhaustive(w: &Mat, src: usize, dst: usize) -> Option<f64> {
    fn go(w: &Mat, u: usize, dst: usize, seen: &mut Vec<bool>, acc: f64, best: &mut Option<f64>) {
        if u == dst {
            if best.map_or(true, |b| acc < b) {
                *best = Some(acc);
            }
            return;
        }
        for v in 0..w.nrows() {
            if !seen[v] && w[(u, v)].is_finite() {
                seen[v] = true;
                go(w, v, dst, seen, acc + w[(u, v)], best);
                seen[v] = false;
            }
        }
    }
    let mut seen = vec![false; w.nrows()];
    seen[src] = true;
    let mut best = None;
    go(w, src, dst, &mut seen, 0.0, &mut best);
    best
}

#[test]
fn titop_clamped_poles_are_the_modes() {
    let layout = TileLayout::band(4);
    let model = build_lattice(&layout, &LatticeParams::default()).unwrap();
    let (freqs, _) = clamped_free_modes(&model, 4).unwrap();
    let body = modal_reduce(&model, &Vector3::zeros(), 4, 4, 0.005).unwrap();
    let s = titop_two_port(&body).unwrap();
    let poles = s.poles().unwrap();
    for (k, w) in freqs.iter().enumerate() {
        let want = Complex64::new(-0.005 * w, w * (1.0f64 - 0.005 * 0.005).sqrt());
        let hit = poles.iter().any(|p| (p - want).norm() < 1e-9 * w);
        assert!(hit, "mode {k} at {w} rad/s not among the poles");
    }
}
