use nalgebra::{DMatrix, Matrix2};
use proptest::prelude::*;

use mixed_ghz::factory::{cluster_state, Basis, Polarization};
use mixed_ghz::measurement::{
    outcome_probabilities, read_counts_csv, sample_counts, write_counts_csv, CountsTable, Setting,
};
use mixed_ghz::nonlocality::{analyze, paradox_lr_contradiction, GhzTest, LrStrategy};
use mixed_ghz::stabilizer::{derive_ghz_paradox, verify_certificate, GraphSpec, Pauli, PauliString, Phase};
use mixed_ghz::state::{DensityMatrix, LocalUnitary, C64};
use mixed_ghz::tomography::{
    conditional_state, expected_counts, ghz_witness, linear_inversion, mle_reconstruct_from, MleOptions,
    TomographySet,
};

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
const BASES: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    (0u8..4, prop::collection::vec(0usize..4, n))
        .prop_map(|(k, ops)| PauliString::new(Phase::from_exponent(k), ops.into_iter().map(|i| PAULIS[i]).collect()))
}

fn pauli_matrix(p: Pauli) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match p {
        Pauli::I => [o, z, z, o],
        Pauli::X => [z, o, o, z],
        Pauli::Y => [z, -i, i, z],
        Pauli::Z => [o, z, z, -o],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

fn dense(p: &PauliString) -> DMatrix<C64> {
    let phase = C64::new(0.0, 1.0).powu(u32::from(p.phase().exponent()));
    let m = p
        .ops()
        .iter()
        .fold(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)), |acc, &q| acc.kronecker(&pauli_matrix(q)));
    m * phase
}

fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
    (a - b).iter().all(|z| z.norm() <= tol)
}

/// `GG†/tr(GG†)` for a random complex `G`.
fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    let d = 1usize << n;
    prop::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |v| {
        let g = DMatrix::from_fn(d, d, |r, c| C64::new(v[2 * (r * d + c)], v[2 * (r * d + c) + 1]));
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(n, m / C64::new(tr, 0.0)).unwrap()
    })
}

fn unitary() -> impl Strategy<Value = Matrix2<C64>> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU).prop_map(|(a, b, c)| {
        let e = |t: f64| C64::from_polar(1.0, t);
        Matrix2::new(
            C64::new(a.cos(), 0.0),
            -e(c) * a.sin(),
            e(b) * a.sin(),
            e(b + c) * a.cos(),
        )
    })
}

fn setting(n: usize) -> impl Strategy<Value = Setting> {
    prop::collection::vec(0usize..3, n).prop_map(|v| Setting::new(v.into_iter().map(|i| BASES[i]).collect()))
}

fn graph(n: usize) -> impl Strategy<Value = GraphSpec> {
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
    prop::collection::vec(any::<bool>(), pairs.len()).prop_map(move |mask| {
        let edges = pairs.iter().zip(mask).filter(|(_, m)| *m).map(|(e, _)| *e);
        GraphSpec::new(n, edges).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn product_matches_dense_matrices((a, b) in (1usize..=3).prop_flat_map(|n| (pauli_string(n), pauli_string(n)))) {
        let ab = a.multiply(&b).unwrap();
        prop_assert!(close(&dense(&ab), &(dense(&a) * dense(&b)), 1e-12));
        let commute = close(&(dense(&a) * dense(&b)), &(dense(&b) * dense(&a)), 1e-12);
        prop_assert_eq!(a.commutes_with(&b), commute);
    }

    #[test]
    fn product_is_associative(a in pauli_string(6), b in pauli_string(6), c in pauli_string(6)) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn square_is_phase_squared_identity(a in pauli_string(5)) {
        let sq = a.multiply(&a).unwrap();
        prop_assert!(sq.is_identity());
        prop_assert_eq!(sq.phase(), a.phase().mul(a.phase()));
    }

    #[test]
    fn commuting_hermitian_products_stay_real(a in pauli_string(5), b in pauli_string(5)) {
        let a = a.with_phase(Phase::PLUS_ONE);
        let b = b.with_phase(Phase::MINUS_ONE);
        let ab = a.multiply(&b).unwrap();
        prop_assert_eq!(ab.phase().is_real(), a.commutes_with(&b));
        prop_assert_eq!(a.commutes_with(&b), b.commutes_with(&a));
    }

    #[test]
    fn text_round_trip(a in pauli_string(7)) {
        let back: PauliString = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn restrict_undoes_embed(
        a in pauli_string(3),
        qubits in prop::sample::subsequence((1usize..=7).collect::<Vec<_>>(), 3).prop_shuffle(),
    ) {
        let wide = a.embed(&qubits, 7).unwrap();
        prop_assert_eq!(wide.weight(), a.weight());
        prop_assert_eq!(wide.restrict(&qubits).unwrap(), a);
    }

    #[test]
    fn partial_trace_and_fidelity(rho in density(3), sigma in density(3), keep in prop::sample::subsequence(vec![1usize, 2, 3], 1..3)) {
        let reduced = rho.partial_trace(&keep).unwrap();
        prop_assert!((reduced.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(reduced.min_eigenvalue() > -1e-10);
        let f = rho.fidelity(&sigma).unwrap();
        let g = sigma.fidelity(&rho).unwrap();
        prop_assert!((f - g).abs() < 1e-8);
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&f));
        prop_assert!((rho.fidelity(&rho).unwrap() - 1.0).abs() < 1e-8);
        // Fuchs–van de Graaf, with F the squared fidelity
        let d = rho.trace_distance(&sigma).unwrap();
        prop_assert!(1.0 - f.sqrt() <= d + 1e-8);
        prop_assert!(d <= (1.0 - f).max(0.0).sqrt() + 1e-8);
    }

    #[test]
    fn local_unitaries_keep_spectrum(rho in density(2), u in unitary(), v in unitary()) {
        let out = rho.apply_local(&LocalUnitary::new(vec![u, v]).unwrap()).unwrap();
        let (mut a, mut b) = (rho.eigenvalues(), out.eigenvalues());
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn outcome_distribution_matches_correlator(rho in density(3), s in setting(3)) {
        let probs = outcome_probabilities(&rho, &s).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(probs.iter().all(|&p| p > -1e-12));
        let weighted: f64 = probs
            .iter()
            .enumerate()
            .map(|(k, p)| if k.count_ones() % 2 == 0 { *p } else { -p })
            .sum();
        prop_assert!((weighted - rho.expectation(&s.observable()).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn conditional_branches_sum_to_one(rho in density(3), q in 1usize..=3, b in 0usize..3) {
        let basis = BASES[b];
        let (plus, p) = conditional_state(&rho, q, basis.plus()).unwrap();
        let (minus, m) = conditional_state(&rho, q, basis.minus()).unwrap();
        prop_assert!((p + m - 1.0).abs() < 1e-10);
        prop_assert_eq!(plus.n(), 2);
        prop_assert!((minus.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(plus.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn witness_is_half_minus_overlap(rho in density(3), positive in any::<bool>()) {
        let sign = if positive { 1 } else { -1 };
        // ⟨GHZ±|ρ|GHZ±⟩ from the four corner entries
        let m = rho.matrix();
        let overlap = 0.5 * (m[(0, 0)].re + m[(7, 7)].re) + f64::from(sign) * m[(0, 7)].re;
        let w = ghz_witness(&rho, sign).unwrap();
        prop_assert!((w.value - (0.5 - overlap)).abs() < 1e-12);
    }

    #[test]
    fn counts_csv_round_trip(s in setting(4), counts in prop::collection::vec(0u64..5000, 16), dur in 1u32..1000) {
        let t = CountsTable::new(s, counts, f64::from(dur) / 8.0).unwrap();
        let back = read_counts_csv(&write_counts_csv(std::slice::from_ref(&t)).unwrap()).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(&back[0].setting, &t.setting);
        prop_assert_eq!(&back[0].counts, &t.counts);
        prop_assert_eq!(back[0].duration_s, t.duration_s);
    }

    #[test]
    fn projector_csv_round_trip(n in 1usize..=3, seed in any::<u64>()) {
        let counts: Vec<u64> = (0..4u64.pow(n as u32)).map(|k| (seed.rotate_left(k as u32) ^ k) % 997).collect();
        let t = TomographySet::new(n, counts, 60.0).unwrap();
        let back = TomographySet::from_csv(&t.to_csv().unwrap()).unwrap();
        prop_assert_eq!(back.counts(), t.counts());
        prop_assert_eq!(back.n(), n);
    }

    #[test]
    fn local_strategy_mixtures_respect_bounds(mix in prop::collection::vec((0u32..256, 1u64..400), 1..12)) {
        let test = GhzTest::standard();
        let tables: Vec<CountsTable> = test
            .settings()
            .map(|s| {
                let mut counts = vec![0u64; 16];
                for &(bits, events) in &mix {
                    counts[LrStrategy::from_xy_bits(bits).outcome(s)] += events;
                }
                CountsTable::new(s.clone(), counts, 60.0).unwrap()
            })
            .collect();
        let report = analyze(&tables, &test).unwrap();
        prop_assert!(report.s.value <= 2.0 + 1e-12, "S = {}", report.s.value);
        prop_assert!(report.observed_fraction.value <= report.lr_bound_fraction.value + 1e-12);
        prop_assert!(!report.violation);
    }

    #[test]
    fn sampling_is_seeded(s in setting(2), seed in any::<u64>()) {
        let probs = [0.1, 0.2, 0.3, 0.4];
        let a = sample_counts(&s, &probs, 500.0, 60.0, seed).unwrap();
        let b = sample_counts(&s, &probs, 500.0, 60.0, seed).unwrap();
        prop_assert_eq!(a.counts, b.counts);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn graph_stabilizers_hold(g in graph(5)) {
        let gens = g.stabilizer_generators();
        let psi = cluster_state(&g).unwrap();
        for a in &gens {
            prop_assert!((psi.expectation(a).unwrap() - 1.0).abs() < 1e-10);
            for b in &gens {
                prop_assert!(a.commutes_with(b));
            }
        }
    }

    #[test]
    fn dephasing_is_trace_preserving(rho in density(2), q in 1usize..=2, lambda in 0.0f64..=1.0, b in 0usize..3) {
        let basis = BASES[b].kets();
        let out = rho.dephase(q, basis, lambda).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.min_eigenvalue() > -1e-10);
        prop_assert!(close(rho.dephase(q, basis, 0.0).unwrap().matrix(), rho.matrix(), 1e-12));
        let full = rho.dephase(q, basis, 1.0).unwrap();
        prop_assert!(close(full.dephase(q, basis, 1.0).unwrap().matrix(), full.matrix(), 1e-12));
    }

    #[test]
    fn inversion_of_large_counts_is_close(rho in density(2)) {
        let expected = expected_counts(&rho, 1e10, 1.0).unwrap();
        let t = TomographySet::new(2, expected.iter().map(|c| c.round() as u64).collect(), 1.0).unwrap();
        let est = linear_inversion(&t).unwrap();
        prop_assert!(close(&est.matrix, rho.matrix(), 1e-8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derived_paradoxes_verify(g in graph(6), support in prop::sample::subsequence(vec![1usize, 2, 3, 4, 5, 6], 3..=5)) {
        if let Some(cert) = derive_ghz_paradox(&g, &support, 3).unwrap() {
            prop_assert!(verify_certificate(&cert, &g).unwrap());
            prop_assert!(paradox_lr_contradiction(&cert).unwrap());
            prop_assert_eq!(cert.sign_product(), -1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn mle_output_is_physical(rho in density(2), rate in 1.0f64..200.0, seed in any::<u64>()) {
        let t = mixed_ghz::tomography::simulate_tomography(&rho, rate, 1.0, seed).unwrap();
        prop_assume!(t.total() > 0);
        let counts: Vec<f64> = t.counts().iter().map(|&c| c as f64).collect();
        let r = mle_reconstruct_from(2, &counts, &MleOptions::default()).unwrap();
        prop_assert!(r.rho.min_eigenvalue() >= -1e-9);
        prop_assert!((r.rho.trace().re - 1.0).abs() < 1e-9);
        prop_assert!(r.history.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }

    #[test]
    fn mle_recovers_state_from_exact_means(rho in density(2)) {
        let counts = expected_counts(&rho, 1e4, 1.0).unwrap();
        let opts = MleOptions { tol: 1e-14, ..MleOptions::default() };
        let r = mle_reconstruct_from(2, &counts, &opts).unwrap();
        prop_assert!(r.rho.trace_distance(&rho).unwrap() < 1e-4);
    }
}

#[test]
fn polarization_labels_are_consistent() {
    for p in Polarization::ALL {
        assert_eq!(Polarization::from_char(p.as_char()), Some(p));
        assert_eq!(p.basis().label(p.eigenvalue() < 0), p);
    }
}
