use nalgebra::DMatrix;
use proptest::prelude::*;

use repcap::channels::{blahut_arimoto_capacity, channel_mutual_information, DiscreteChannel, DEFAULT_MAX_ITER};
use repcap::codec::{effective_support_audit, joint_typicality_decode, random_codebook, EmbeddingSpace};
use repcap::collapse::{class_statistics, etf_residuals, LabeledEmbeddings};
use repcap::formats::{format_float, parse_channel, parse_pmf};
use repcap::prob::{conditional_entropy, entropy, mutual_information, Alphabet, JointPmf, Pmf};
use repcap::rate_distortion::{rd_curve, DistortionMeasure};
use repcap::sources::{MarkovSource, Source};
use repcap::typicality::{is_jointly_typical, JointTypicalityContext};
use repcap::Error;

fn normalized(w: Vec<f64>) -> Option<Vec<f64>> {
    let s: f64 = w.iter().sum();
    (s > 1e-3).then(|| w.iter().map(|x| x / s).collect())
}

fn arb_pmf(k: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(0.0f64..1.0, k).prop_filter_map("zero mass", |w| normalized(w).map(|p| Pmf::from_probs(p).unwrap()))
}

fn arb_channel() -> impl Strategy<Value = DiscreteChannel> {
    (2usize..5, 2usize..5).prop_flat_map(|(x, y)| {
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, y), x).prop_filter_map("zero row", |rows| {
            let rows: Option<Vec<Vec<f64>>> = rows.into_iter().map(normalized).collect();
            rows.map(|r| DiscreteChannel::from_rows(r).unwrap())
        })
    })
}

fn arb_channel_with_input() -> impl Strategy<Value = (DiscreteChannel, Pmf)> {
    arb_channel().prop_flat_map(|c| {
        let k = c.inputs();
        (Just(c), arb_pmf(k))
    })
}

fn random_orthogonal(dim: usize, seed: &[f64]) -> DMatrix<f64> {
    let m = DMatrix::from_iterator(dim, dim, seed.iter().copied());
    m.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutual_information_never_exceeds_capacity((ch, input) in arb_channel_with_input()) {
        // a slow solve still carries certified bounds
        let cap = match blahut_arimoto_capacity(&ch, 1e-10, DEFAULT_MAX_ITER) {
            Ok(c) => c,
            Err(Error::CapacityNotConverged(c)) => *c,
            Err(e) => panic!("{e}"),
        };
        let i = channel_mutual_information(&input, &ch).unwrap();
        prop_assert!(i <= cap.upper_bound + 1e-12, "I = {i}, upper = {}", cap.upper_bound);
        prop_assert!(cap.lower_bound <= cap.capacity_bits && cap.capacity_bits <= cap.upper_bound);
    }

    #[test]
    fn mutual_information_two_ways((ch, input) in arb_channel_with_input()) {
        let j = ch.joint(&input).unwrap();
        let i = mutual_information(&j);
        let via_y = entropy(&j.col_marginal()) - conditional_entropy(&j);
        let via_x = entropy(&j.row_marginal()) - conditional_entropy(&j.transpose());
        prop_assert!((i - via_y).abs() < 1e-10);
        prop_assert!((i - via_x).abs() < 1e-10);
    }

    #[test]
    fn symmetric_channel_has_uniform_optimal_input(p in 0.0f64..0.5, k in 2usize..6) {
        // k-ary symmetric channel: keep with 1 - p, else uniform over the others
        let rows = (0..k)
            .map(|x| (0..k).map(|y| if x == y { 1.0 - p } else { p / (k - 1) as f64 }).collect())
            .collect();
        let ch = DiscreteChannel::from_rows(rows).unwrap();
        let cap = blahut_arimoto_capacity(&ch, 1e-12, DEFAULT_MAX_ITER).unwrap();
        for &r in &cap.optimal_input {
            prop_assert!((r - 1.0 / k as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn rd_curve_nonincreasing_convex_and_consistent(src in arb_pmf(3), d01 in 0.2f64..2.0, d02 in 0.2f64..2.0) {
        let d = DistortionMeasure::from_rows(vec![
            vec![0.0, d01, d02],
            vec![d01, 0.0, 1.0],
            vec![d02, 1.0, 0.0],
        ]).unwrap();
        let curve = rd_curve(&src, &d, 7).unwrap();
        // zero diagonal, positive off-diagonal: R(0) = H
        prop_assert!((curve[0].rate - entropy(&src)).abs() < 1e-6);
        for w in curve.windows(2) {
            prop_assert!(w[1].rate <= w[0].rate + 1e-9);
        }
        for w in curve.windows(3) {
            // equally spaced in D, so convexity is a second difference
            prop_assert!(w[0].rate + w[2].rate - 2.0 * w[1].rate >= -1e-7);
        }
        for pt in &curve {
            let j = pt.joint(&src);
            prop_assert!((mutual_information(&j) - pt.rate).abs() < 1e-8);
            let expected: f64 = (0..3).flat_map(|x| (0..3).map(move |y| (x, y))).map(|(x, y)| j.get(x, y) * d.d(x, y)).sum();
            prop_assert!(expected <= pt.distortion + 1e-9);
        }
    }

    #[test]
    fn jointly_typical_implies_marginally_typical(seed in any::<u64>(), eps in 0.05f64..0.4) {
        let n = 16;
        let ch = DiscreteChannel::bsc(0.1).unwrap();
        let input = Pmf::bernoulli(0.3).unwrap();
        let ctx = JointTypicalityContext::new(ch.joint(&input).unwrap(), n, eps).unwrap();
        let x = Source::iid(input).sample(n, seed).unwrap().symbols;
        let y = ch.transmit(&x, seed ^ 1).unwrap();
        if is_jointly_typical(&x, &y, &ctx) {
            prop_assert!(ctx.x_typical(&x));
            prop_assert!(ctx.y_typical(&y));
        }
    }

    #[test]
    fn decoding_is_deterministic(seed in any::<u64>()) {
        let n = 12;
        let src = Source::bernoulli(0.5).unwrap();
        let book = random_codebook(32, &src, n, seed).unwrap();
        let ctx = JointTypicalityContext::new(DiscreteChannel::bsc(0.05).unwrap().joint(src.marginal()).unwrap(), n, 0.3).unwrap();
        let y = DiscreteChannel::bsc(0.05).unwrap().transmit(&book.codewords[3], seed).unwrap();
        let a = joint_typicality_decode(&y, &book, &ctx);
        let b = joint_typicality_decode(&y, &book, &ctx);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn effective_support_within_space(points in prop::collection::vec(prop::collection::vec(0u8..4, 2), 1..40)) {
        let space = EmbeddingSpace::new(2, 2).unwrap();
        let z: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
        let audit = effective_support_audit(&z).unwrap();
        prop_assert!(audit.q_tilde <= space.capacity_bits() as f64);
        prop_assert!(audit.distinct_nonzero_count <= z.len());
    }

    #[test]
    fn etf_residuals_invariant_under_rotation_and_scale(
        means in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..5),
        basis in prop::collection::vec(-1.0f64..1.0, 9),
        scale in 0.1f64..10.0,
    ) {
        prop_assume!(means.iter().all(|m| m.iter().map(|v| v * v).sum::<f64>() > 0.01));
        let q = random_orthogonal(3, &basis);
        prop_assume!((q.determinant().abs() - 1.0).abs() < 1e-9);
        let moved: Vec<Vec<f64>> = means
            .iter()
            .map(|m| (&q * nalgebra::DVector::from_column_slice(m) * scale).iter().copied().collect())
            .collect();
        let a = etf_residuals(&means).unwrap();
        let b = etf_residuals(&moved).unwrap();
        prop_assert!((a.mean_sum_norm - b.mean_sum_norm).abs() < 1e-9);
        prop_assert!((a.norm_spread - b.norm_spread).abs() < 1e-9);
        prop_assert!((a.gram_deviation - b.gram_deviation).abs() < 1e-9);
    }

    #[test]
    fn collapse_index_in_unit_interval(z in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 4..20)) {
        let labels: Vec<&str> = (0..z.len()).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
        let data = LabeledEmbeddings::from_parts(&labels, z, None).unwrap();
        let ci = class_statistics(&data).unwrap().collapse_index();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ci));
    }

    #[test]
    fn collapse_index_zero_for_point_classes(a in prop::collection::vec(-5.0f64..5.0, 2), b in prop::collection::vec(-5.0f64..5.0, 2)) {
        prop_assume!(a != b);
        let data = LabeledEmbeddings::from_parts(&["a", "a", "b", "b"], vec![a.clone(), a, b.clone(), b], None).unwrap();
        prop_assert_eq!(class_statistics(&data).unwrap().collapse_index(), 0.0);
    }

    #[test]
    fn collapse_index_one_when_means_coincide(d in prop::collection::vec(0.1f64..5.0, 2)) {
        let z = vec![vec![d[0], d[1]], vec![-d[0], -d[1]], vec![d[1], -d[0]], vec![-d[1], d[0]]];
        let data = LabeledEmbeddings::from_parts(&["a", "a", "b", "b"], z, None).unwrap();
        prop_assert!((class_statistics(&data).unwrap().collapse_index() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn markov_rate_below_stationary_entropy(a in 0.05f64..0.95, b in 0.05f64..0.95) {
        let m = MarkovSource::new(Alphabet::indexed(2), vec![vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap();
        let h_stat = entropy(m.stationary());
        let src: Source = m.into();
        prop_assert!(src.entropy_rate() <= h_stat + 1e-12);
    }

    #[test]
    fn pmf_csv_round_trip(p in arb_pmf(5)) {
        let mut text = String::from("symbol,prob\n");
        for (i, v) in p.probs().iter().enumerate() {
            text.push_str(&format!("s{i},{v:e}\n"));
        }
        let back = parse_pmf(&text).unwrap();
        for (a, b) in back.probs().iter().zip(p.probs()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn channel_csv_round_trip(ch in arb_channel()) {
        let mut text = String::from("x");
        for y in 0..ch.outputs() {
            text.push_str(&format!(",{y}"));
        }
        text.push('\n');
        for x in 0..ch.inputs() {
            text.push_str(&x.to_string());
            for &v in ch.row(x) {
                text.push(',');
                text.push_str(&format_float(v));
            }
            text.push('\n');
        }
        let back = parse_channel(&text).unwrap();
        for x in 0..ch.inputs() {
            for y in 0..ch.outputs() {
                prop_assert!((back.prob(x, y) - ch.prob(x, y)).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn bsc_capacity_decreasing_in_p() {
    let caps: Vec<f64> = (0..=10)
        .map(|i| blahut_arimoto_capacity(&DiscreteChannel::bsc(0.05 * i as f64).unwrap(), 1e-10, DEFAULT_MAX_ITER).unwrap().capacity_bits)
        .collect();
    assert!(caps.windows(2).all(|w| w[1] < w[0]), "{caps:?}");
    assert!(caps[10].abs() < 1e-10);
}

#[test]
fn joint_pmf_marginals_recovered() {
    let j = JointPmf::from_rows(vec![vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
    assert!((j.row_marginal().probs()[1] - 0.7).abs() < 1e-15);
    assert!((j.col_marginal().probs()[0] - 0.4).abs() < 1e-15);
}
