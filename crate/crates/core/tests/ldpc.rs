use std::fs;

use proptest::prelude::*;
use rand::Rng as _;

use rnna::ldpc::{
    cache_file_name, load_or_construct, nms_decode, peg_construct, read_matrix, write_matrix, Encoder,
    NmsDecoder, ParityCheckMatrix, PegHeader,
};
use rnna::rng::rng_from_seed;

fn small() -> ParityCheckMatrix {
    peg_construct(1008, 3, 6, 0).unwrap()
}

/// Textbook flooding min-sum with explicit per-edge loops.
fn reference_decode(h: &ParityCheckMatrix, llrs: &[f64], alpha: f64, max_iter: usize) -> (Vec<u8>, usize, bool) {
    let hard = |t: &[f64]| t.iter().map(|&x| u8::from(x < 0.0)).collect::<Vec<u8>>();
    let bits = hard(llrs);
    if h.is_codeword(&bits) {
        return (bits, 0, true);
    }
    let rows = h.rows();
    let mut v2c: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&c| llrs[c as usize]).collect()).collect();
    let mut c2v: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut bits = bits;
    for it in 1..=max_iter {
        for (r, row) in rows.iter().enumerate() {
            for i in 0..row.len() {
                let mut sign = 1.0;
                let mut min = f64::INFINITY;
                for j in 0..row.len() {
                    if j != i {
                        if v2c[r][j] < 0.0 {
                            sign = -sign;
                        }
                        min = min.min(v2c[r][j].abs());
                    }
                }
                c2v[r][i] = sign * alpha * min;
            }
        }
        let mut total = llrs.to_vec();
        for (r, row) in rows.iter().enumerate() {
            for (i, &c) in row.iter().enumerate() {
                total[c as usize] += c2v[r][i];
            }
        }
        for (r, row) in rows.iter().enumerate() {
            for (i, &c) in row.iter().enumerate() {
                v2c[r][i] = total[c as usize] - c2v[r][i];
            }
        }
        bits = hard(&total);
        if h.is_codeword(&bits) {
            return (bits, it, true);
        }
    }
    (bits, max_iter, false)
}

#[test]
fn peg_is_regular_and_deterministic() {
    let h = small();
    assert!(h.cols().iter().all(|c| c.len() == 3));
    assert!(h.rows().iter().all(|r| r.len() == 6));
    assert_eq!(h, small());
    assert_ne!(h, peg_construct(1008, 3, 6, 1).unwrap());
}

#[test]
fn cached_matrices_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ha = load_or_construct(a.path(), 1008, 3, 6, 5).unwrap();
    let hb = load_or_construct(b.path(), 1008, 3, 6, 5).unwrap();
    assert_eq!(ha, hb);
    let name = cache_file_name(1008, 3, 6, 5);
    let bytes = fs::read(a.path().join(&name)).unwrap();
    assert_eq!(bytes, fs::read(b.path().join(&name)).unwrap());
    // a cache hit returns the stored matrix unchanged
    assert_eq!(load_or_construct(a.path(), 1008, 3, 6, 5).unwrap(), ha);
    assert_eq!(fs::read(a.path().join(&name)).unwrap(), bytes);
}

#[test]
fn matrix_file_round_trip_and_corruption() {
    let h = small();
    let header = PegHeader { n: 1008, m: h.m() as u32, d_v: 3, d_c: 6, seed: 0 };
    let mut buf = Vec::new();
    write_matrix(&mut buf, &header, &h).unwrap();
    let (back_header, back) = read_matrix(buf.as_slice()).unwrap();
    assert_eq!(back_header, header);
    assert_eq!(back, h);
    assert!(read_matrix(&buf[..buf.len() - 3]).is_err());
    let mut bad = buf.clone();
    bad[0] ^= 0xff;
    assert!(read_matrix(bad.as_slice()).is_err());
}

#[test]
fn clean_channel_decodes_in_zero_iterations() {
    let h = small();
    let enc = Encoder::new(&h);
    let cw = enc.encode(&vec![1; enc.k()]).unwrap();
    let llrs: Vec<f64> = cw.iter().map(|&b| if b == 1 { -2.0 } else { 2.0 }).collect();
    let r = nms_decode(&h, &llrs, 0.5, 10);
    assert!(r.converged);
    assert_eq!(r.iterations, 0);
    assert_eq!(r.bits, cw);
}

#[test]
fn rejects_wrong_info_length() {
    let enc = Encoder::new(&small());
    assert!(enc.encode(&[0, 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn encoded_words_satisfy_parity(seed in any::<u64>()) {
        let h = small();
        let enc = Encoder::new(&h);
        prop_assert_eq!(enc.k(), h.n() - enc.rank());
        let mut rng = rng_from_seed(seed);
        let info: Vec<u8> = (0..enc.k()).map(|_| rng.random_range(0..2u8)).collect();
        let cw = enc.encode(&info).unwrap();
        prop_assert!(h.is_codeword(&cw));
        prop_assert_eq!(enc.extract_info(&cw), info);
    }

    #[test]
    fn decoder_matches_reference(seed in any::<u64>(), flips in 0.02f64..0.12) {
        let h = small();
        let enc = Encoder::new(&h);
        let mut rng = rng_from_seed(seed);
        let info: Vec<u8> = (0..enc.k()).map(|_| rng.random_range(0..2u8)).collect();
        let cw = enc.encode(&info).unwrap();
        // integer LLRs and alpha = 1/2 keep every message exact in binary
        let llrs: Vec<f64> = cw
            .iter()
            .map(|&b| {
                let mag = rng.random_range(0..4) as f64;
                let correct = if b == 1 { -mag } else { mag };
                if rng.random::<f64>() < flips { -correct } else { correct }
            })
            .collect();
        let r = NmsDecoder::new(&h).decode(&llrs, 0.5, 20);
        let (bits, iters, ok) = reference_decode(&h, &llrs, 0.5, 20);
        prop_assert_eq!(r.bits, bits);
        prop_assert_eq!(r.iterations, iters);
        prop_assert_eq!(r.converged, ok);
    }
}
