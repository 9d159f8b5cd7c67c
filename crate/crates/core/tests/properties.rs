mod common;

use common::*;
use grf_evidence::calibration::{curvature_matrix, upper_cholesky, LadderSpec, TemperatureLadder};
use grf_evidence::ergm::{change_stats, network_stats, ErgmModel, ModelSpec, NetworkGraph};
use grf_evidence::numeric::{log_mean_exp, log_sum_exp};
use grf_evidence::potts::{potts_stat, Lattice};
use grf_evidence::pseudolikelihood::PlSurface;
use nalgebra::DMatrix;
use proptest::prelude::*;

const SPEC: &str = "edges + gwesp(0.5) + gwd(0.8) + nodematch(group)";

fn graph_strategy() -> impl Strategy<Value = NetworkGraph> {
    (3usize..9).prop_flat_map(|n| {
        let dyads = n * (n - 1) / 2;
        (
            proptest::collection::vec(any::<bool>(), dyads),
            proptest::collection::vec(0u8..3, n),
        )
            .prop_map(move |(mask, groups)| {
                let pairs: Vec<(usize, usize)> = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .zip(&mask)
                    .filter(|(_, &on)| on)
                    .map(|(p, _)| p)
                    .collect();
                let mut g = NetworkGraph::from_edges(n, &pairs).unwrap();
                g.set_covariate("group", groups.iter().map(|c| c.to_string()).collect()).unwrap();
                g
            })
    })
}

fn lattice_strategy() -> impl Strategy<Value = Lattice> {
    (1usize..6, 1usize..6, 2u8..5).prop_flat_map(|(h, w, s)| {
        proptest::collection::vec(1..=s, h * w).prop_map(move |cells| Lattice::new(h, w, s, cells).unwrap())
    })
}

/// Statistics straight from the adjacency matrix.
fn reference_stats(g: &NetworkGraph) -> Vec<f64> {
    let n = g.node_count();
    let weight = |decay: f64, k: usize| decay.exp() * (1.0 - (1.0 - (-decay).exp()).powi(k as i32));
    let groups = g.covariate("group").unwrap();
    let (mut edges, mut esp, mut deg, mut matched) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let d = (0..n).filter(|&j| j != i && g.has_edge(i, j)).count();
        deg += weight(0.8, d);
        for j in i + 1..n {
            if g.has_edge(i, j) {
                edges += 1.0;
                let sp = (0..n).filter(|&k| g.has_edge(i, k) && g.has_edge(j, k)).count();
                esp += weight(0.5, sp);
                if groups[i] == groups[j] {
                    matched += 1.0;
                }
            }
        }
    }
    vec![edges, esp, deg, matched]
}

fn naive_ergm_log_pl(g: &NetworkGraph, spec: &ModelSpec, theta: &[f64]) -> f64 {
    let n = g.node_count();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let mut on = g.clone();
            on.add_edge(i, j);
            let mut off = g.clone();
            off.remove_edge(i, j);
            let delta: f64 = network_stats(&on, spec)
                .unwrap()
                .iter()
                .zip(network_stats(&off, spec).unwrap().iter())
                .zip(theta)
                .map(|((a, b), t)| (a - b) * t)
                .sum();
            let eta = if g.has_edge(i, j) { delta } else { 0.0 };
            total += eta - log_sum_exp(&[0.0, delta]);
        }
    }
    total
}

fn naive_potts_log_pl(l: &Lattice, theta: f64) -> f64 {
    let (h, w) = (l.height(), l.width());
    let mut total = 0.0;
    for r in 0..h {
        for c in 0..w {
            let mut counts = vec![0.0; l.states() as usize];
            let nbrs = [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)];
            for (rr, cc) in nbrs {
                if rr < h && cc < w {
                    counts[l.get(rr, cc) as usize - 1] += 1.0;
                }
            }
            let logits: Vec<f64> = counts.iter().map(|k| theta * k).collect();
            total += logits[l.get(r, c) as usize - 1] - log_sum_exp(&logits);
        }
    }
    total
}

fn spd_strategy(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, d * d)
        .prop_map(move |v| {
            let a = DMatrix::from_vec(d, d, v);
            &a * a.transpose() + DMatrix::identity(d, d) * 0.5
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistics_match_adjacency_reference(g in graph_strategy()) {
        let spec: ModelSpec = SPEC.parse().unwrap();
        let got = network_stats(&g, &spec).unwrap();
        for (a, b) in got.iter().zip(reference_stats(&g)) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn change_statistics_match_recomputation(g in graph_strategy(), pick in any::<prop::sample::Index>()) {
        let spec: ModelSpec = SPEC.parse().unwrap();
        let n = g.node_count();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let (i, j) = pairs[pick.index(pairs.len())];
        let delta = change_stats(&g, &spec, i, j).unwrap();
        let mut on = g.clone();
        on.add_edge(i, j);
        let mut off = g.clone();
        off.remove_edge(i, j);
        let a = network_stats(&on, &spec).unwrap();
        let b = network_stats(&off, &spec).unwrap();
        for k in 0..spec.dim() {
            prop_assert!((delta[k] - (a[k] - b[k])).abs() < 1e-9 * (1.0 + a[k].abs()));
        }
    }

    #[test]
    fn statistics_ignore_node_labels(g in graph_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let spec: ModelSpec = SPEC.parse().unwrap();
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = network_stats(&g, &spec).unwrap();
        let b = network_stats(&g.permuted(&perm), &spec).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn compressed_pseudolikelihood_matches_naive_sum(
        g in graph_strategy(),
        th in proptest::collection::vec(-1.5f64..1.5, 4),
    ) {
        let spec: ModelSpec = SPEC.parse().unwrap();
        let model = ErgmModel::new(&spec, &g).unwrap();
        let surface = PlSurface::ergm(&model, &g).unwrap();
        let naive = naive_ergm_log_pl(&g, &spec, &th);
        prop_assert!((surface.log_pl(&th) - naive).abs() < 1e-9 * (1.0 + naive.abs()));
    }

    #[test]
    fn potts_pseudolikelihood_matches_naive_sum(l in lattice_strategy(), th in -1.0f64..2.0) {
        let surface = PlSurface::potts(&l).unwrap();
        let naive = naive_potts_log_pl(&l, th);
        prop_assert!((surface.log_pl(&[th]) - naive).abs() < 1e-9 * (1.0 + naive.abs()));
    }

    #[test]
    fn potts_statistic_is_symmetric(l in lattice_strategy(), shift in 1u8..4) {
        let s = l.states();
        let perm: Vec<u8> = (0..s).map(|k| (k + shift) % s + 1).collect();
        let base = potts_stat(&l);
        prop_assert_eq!(potts_stat(&l.relabeled(&perm)), base);
        prop_assert_eq!(potts_stat(&l.transposed()), base);
        let pl = PlSurface::potts(&l).unwrap().log_pl(&[0.7]);
        let moved = PlSurface::potts(&l.relabeled(&perm).transposed()).unwrap().log_pl(&[0.7]);
        prop_assert!((pl - moved).abs() < 1e-9 * (1.0 + pl.abs()));
    }

    #[test]
    fn curvature_matrix_reconstructs_target(
        (ll, pl) in (1usize..5).prop_flat_map(|d| (spd_strategy(d), spd_strategy(d)))
    ) {
        let w = curvature_matrix(&-&ll, &-&pl).unwrap();
        let d = w.nrows();
        for i in 0..d {
            prop_assert!(w[(i, i)] > 0.0);
            for j in 0..i {
                prop_assert_eq!(w[(i, j)], 0.0);
            }
        }
        let recon = w.transpose() * &pl * &w;
        prop_assert!((recon - &ll).amax() < 1e-8 * ll.amax());
        let u = upper_cholesky(&ll).unwrap();
        prop_assert!((u.transpose() * &u - &ll).amax() < 1e-10 * ll.amax());
    }

    #[test]
    fn log_sum_exp_is_stable(xs in proptest::collection::vec(-50.0f64..50.0, 1..20), shift in -700.0f64..700.0) {
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        prop_assert!((log_sum_exp(&xs) - direct).abs() < 1e-10 * (1.0 + direct.abs()));
        let shifted: Vec<f64> = xs.iter().map(|x| x + shift).collect();
        prop_assert!((log_sum_exp(&shifted) - direct - shift).abs() < 1e-9 * (1.0 + shift.abs()));
        let lme = log_mean_exp(&xs);
        prop_assert!((lme - (direct - (xs.len() as f64).ln())).abs() < 1e-10 * (1.0 + lme.abs()));
    }

    #[test]
    fn ladders_are_increasing_from_zero_to_one(rungs in 1usize..300, power in 0.2f64..8.0) {
        let ladder = TemperatureLadder::from_spec(LadderSpec { rungs, power }).unwrap();
        let t = ladder.points();
        prop_assert_eq!(t.len(), rungs + 1);
        prop_assert_eq!(t[0], 0.0);
        prop_assert_eq!(*t.last().unwrap(), 1.0);
        prop_assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn malformed_ladders_are_rejected() {
    assert!(TemperatureLadder::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
    assert!(TemperatureLadder::new(vec![0.1, 1.0]).is_err());
    assert!(TemperatureLadder::new(vec![0.0, 0.9]).is_err());
    assert!(TemperatureLadder::from_spec(LadderSpec { rungs: 0, power: 1.0 }).is_err());
}

#[test]
fn tnt_kernel_preserves_the_target() {
    let (stationary, balance) = tnt_balance_error();
    assert!(stationary < 1e-12 && balance < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn change_statistics_match_recomputation_per_term(g in graph_strategy(), pick in any::<prop::sample::Index>(), term in 0usize..4) {
        let full: ModelSpec = SPEC.parse().unwrap();
        let spec = ModelSpec::new(vec![full.terms()[term].clone()]).unwrap();
        let n = g.node_count();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let (i, j) = pairs[pick.index(pairs.len())];
        let mut on = g.clone();
        on.add_edge(i, j);
        let mut off = g.clone();
        off.remove_edge(i, j);
        let expect = network_stats(&on, &spec).unwrap()[0] - network_stats(&off, &spec).unwrap()[0];
        prop_assert!((change_stats(&g, &spec, i, j).unwrap()[0] - expect).abs() < 1e-9 * (1.0 + expect.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pseudolikelihood_is_concave_and_mple_is_stationary(
        g in graph_strategy(),
        th in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let spec: ModelSpec = SPEC.parse().unwrap();
        let surface = PlSurface::ergm(&ErgmModel::new(&spec, &g).unwrap(), &g).unwrap();
        let eig = surface.hessian(&th).symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|&e| e <= 1e-9), "{eig:?}");
        if let Ok(m) = grf_evidence::pseudolikelihood::mple(
            &surface,
            &grf_evidence::Theta::zeros(4),
            grf_evidence::pseudolikelihood::DEFAULT_MPLE_TOL,
            grf_evidence::pseudolikelihood::DEFAULT_MPLE_MAX_ITER,
        ) {
            prop_assert!(surface.gradient(&m.theta).amax() < grf_evidence::pseudolikelihood::DEFAULT_MPLE_TOL);
        }
    }

    #[test]
    fn unnormalised_log_likelihood_is_linear(
        g in graph_strategy(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        t1 in proptest::collection::vec(-2.0f64..2.0, 4),
        t2 in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let spec: ModelSpec = SPEC.parse().unwrap();
        let model = ErgmModel::new(&spec, &g).unwrap();
        let f = |t: &[f64]| grf_evidence::model::log_unnorm(&model, &g, &theta(t)).unwrap();
        let mix: Vec<f64> = t1.iter().zip(&t2).map(|(x, y)| a * x + b * y).collect();
        let lhs = f(&mix);
        let rhs = a * f(&t1) + b * f(&t2);
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn edges_only_pseudolikelihood_is_the_likelihood(g in graph_strategy(), t in -3.0f64..3.0) {
        let spec: ModelSpec = "edges".parse().unwrap();
        let surface = PlSurface::ergm(&ErgmModel::new(&spec, &g).unwrap(), &g).unwrap();
        let dyads = g.dyad_count() as f64;
        let exact = t * g.edge_count() as f64 - dyads * t.exp().ln_1p();
        prop_assert!((surface.log_pl(&[t]) - exact).abs() < 1e-10 * (1.0 + exact.abs()));
    }
}

#[test]
fn edges_only_enumeration_matches_closed_form() {
    use grf_evidence::model::{brute_force_log_partition, DEFAULT_ENUMERATION_CAP};
    for n in 2..=6 {
        let g = NetworkGraph::empty(n);
        let model = ErgmModel::new(&"edges".parse().unwrap(), &g).unwrap();
        for t in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let exact = (n * (n - 1) / 2) as f64 * (1.0f64 + f64::exp(t)).ln();
            let got = brute_force_log_partition(&model, &theta(&[t]), DEFAULT_ENUMERATION_CAP).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-10, "n={n} θ={t}: {got} vs {exact}");
        }
    }
}

#[test]
fn pseudolikelihood_at_zero_is_uniform_on_any_lattice() {
    for (h, w, s) in [(3, 4, 2u8), (5, 2, 3), (1, 7, 4)] {
        let l = Lattice::uniform(h, w, s, 1).unwrap();
        let pl = PlSurface::potts(&l).unwrap().log_pl(&[0.0]);
        assert!((pl + (h * w) as f64 * (s as f64).ln()).abs() < 1e-12);
    }
}
