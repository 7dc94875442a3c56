mod common;

use polar_idma::bp::{
    decode, decode_traced, decode_warm, write_trace_csv, DecoderConfig, FactorGraphState,
    StopCriterion,
};
use polar_idma::polar::{construct_bhattacharyya, encode, nr_reliability_order, info_set_from_order};
use polar_idma::user::map_bpsk;
use rand_distr::{Distribution, StandardNormal};

fn noisy_llrs(codeword: &[u8], sigma: f64, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
    map_bpsk(codeword)
        .iter()
        .map(|&s| {
            let n: f64 = StandardNormal.sample(rng);
            2.0 * (s + sigma * n) / (sigma * sigma)
        })
        .collect()
}

#[test]
fn saturated_input_decodes_every_codeword_n16() {
    for k in 1..=16 {
        let (info, _) = construct_bhattacharyya(16, k, 0.5).unwrap();
        for m in 0..(1usize << k) {
            let u = common::bits_of(m, k);
            let x = encode(&u, &info).unwrap();
            let llrs: Vec<f64> = map_bpsk(&x).iter().map(|s| 100.0 * s).collect();
            let r = decode(&llrs, &info, &DecoderConfig::default()).unwrap();
            assert_eq!(r.info_bits, u);
            assert!(r.stopped_early && r.iters_used <= 2);
        }
    }
}

#[test]
fn moderate_noise_mostly_decodes() {
    let order = nr_reliability_order(256).unwrap();
    let info = info_set_from_order(&order, 64).unwrap();
    let mut rng = common::rng(5);
    let mut failures = 0;
    for _ in 0..50 {
        let u = common::random_bits(64, &mut rng);
        let x = encode(&u, &info).unwrap();
        let llrs = noisy_llrs(&x, 0.6, &mut rng);
        let r = decode(&llrs, &info, &DecoderConfig::default()).unwrap();
        failures += (r.info_bits != u) as usize;
    }
    assert!(failures <= 2, "{failures} failures");
}

#[test]
fn genie_multi_trellis_never_loses_a_frame() {
    let (info, _) = construct_bhattacharyya(64, 32, 0.5).unwrap();
    let mut rng = common::rng(9);
    let mut rescued = 0;
    for _ in 0..300 {
        let u = common::random_bits(32, &mut rng);
        let x = encode(&u, &info).unwrap();
        let llrs = noisy_llrs(&x, 0.95, &mut rng);
        let run = |q| {
            let cfg = DecoderConfig {
                num_graphs: q,
                stop: StopCriterion::Genie(u.clone()),
                ..DecoderConfig::default()
            };
            decode(&llrs, &info, &cfg).unwrap().info_bits == u
        };
        let (one, four) = (run(1), run(4));
        assert!(!one || four);
        rescued += (!one && four) as usize;
    }
    assert!(rescued > 0, "permuted graphs never helped");
}

#[test]
fn warm_start_depends_on_graph_state() {
    let (info, _) = construct_bhattacharyya(32, 16, 0.5).unwrap();
    let mut rng = common::rng(21);
    let a = encode(&common::random_bits(16, &mut rng), &info).unwrap();
    let b = encode(&common::random_bits(16, &mut rng), &info).unwrap();
    let la = noisy_llrs(&a, 0.8, &mut rng);
    let lb = noisy_llrs(&b, 0.8, &mut rng);

    let mut stale = FactorGraphState::initialize(&la, &info, 100.0).unwrap();
    decode_warm(&mut stale, &la, 5, &StopCriterion::None).unwrap();
    let warm = decode_warm(&mut stale, &lb, 1, &StopCriterion::None).unwrap();

    let mut fresh = FactorGraphState::initialize(&lb, &info, 100.0).unwrap();
    let cold = decode_warm(&mut fresh, &lb, 1, &StopCriterion::None).unwrap();
    let cfg = DecoderConfig {
        max_iters: 1,
        stop: StopCriterion::None,
        ..DecoderConfig::default()
    };
    assert_eq!(cold, decode(&lb, &info, &cfg).unwrap());
    assert_ne!(warm.extrinsic, cold.extrinsic);
}

#[test]
fn rejects_bad_input() {
    let (info, _) = construct_bhattacharyya(8, 4, 0.5).unwrap();
    let mut llrs = vec![1.0; 8];
    assert!(decode(&llrs[..4], &info, &DecoderConfig::default()).is_err());
    llrs[3] = f64::NAN;
    assert!(decode(&llrs, &info, &DecoderConfig::default()).is_err());
    let cfg = DecoderConfig {
        max_iters: 0,
        ..DecoderConfig::default()
    };
    assert!(decode(&[1.0; 8], &info, &cfg).is_err());
}

#[test]
fn trace_lists_every_iteration() {
    let (info, _) = construct_bhattacharyya(16, 8, 0.5).unwrap();
    let cfg = DecoderConfig {
        max_iters: 3,
        num_graphs: 2,
        stop: StopCriterion::None,
        ..DecoderConfig::default()
    };
    let mut rows = Vec::new();
    decode_traced(&[0.1; 16], &info, &cfg, &mut rows).unwrap();
    assert_eq!(rows.len(), 6);
    let mut out = Vec::new();
    write_trace_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().last().unwrap().starts_with("2,3,0,"));
}
