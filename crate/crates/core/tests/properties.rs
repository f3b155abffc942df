use hausdim::discretize::{assemble, assemble_one, interp_weights, ErrorModel, Mesh, Which};
use hausdim::ifs::{continuants, MapFamily};
use hausdim::spectral::{collatz_wielandt, hilbert_metric, power_enclosure, PowerOptions};
use hausdim::SparseNonnegMatrix;
use proptest::prelude::*;

fn positive_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..100.0, n)
}

fn digit_set() -> impl Strategy<Value = Vec<f64>> {
    prop::sample::subsequence(vec![1.0, 2.0, 3.0, 4.0, 5.0, 7.0], 1..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hat_weights_partition_unity(n in 2usize..500, lo in -3.0f64..3.0, len in 0.01f64..10.0, t in 0.0f64..=1.0) {
        let mesh = Mesh::uniform(lo, lo + len, n).unwrap();
        let y = lo + t * len;
        let ip = interp_weights(&mesh, y).unwrap();
        prop_assert!(ip.col + 1 < mesh.dim());
        prop_assert!(ip.w_left >= 0.0 && ip.w_right >= 0.0);
        prop_assert!((ip.w_left + ip.w_right - 1.0).abs() <= 1e-15);
        let nodes = mesh.nodes();
        prop_assert!(nodes[ip.col] <= y + 1e-12 * len && y <= nodes[ip.col + 1] + 1e-12 * len);
        // linear functions are reproduced
        let recon = ip.w_left * (2.0 * nodes[ip.col] - 1.0) + ip.w_right * (2.0 * nodes[ip.col + 1] - 1.0);
        prop_assert!((recon - (2.0 * y - 1.0)).abs() <= 1e-13 * (1.0 + y.abs()));
    }

    #[test]
    fn hilbert_metric_is_projective(u in positive_vec(8), v in positive_vec(8), w in positive_vec(8), c in 0.001f64..1000.0) {
        let d = |a: &[f64], b: &[f64]| hilbert_metric(a, b).unwrap();
        let cu: Vec<f64> = u.iter().map(|x| c * x).collect();
        prop_assert!(d(&cu, &u).abs() <= 1e-12);
        prop_assert!((d(&cu, &v) - d(&u, &v)).abs() <= 1e-12);
        prop_assert!((d(&u, &v) - d(&v, &u)).abs() <= 1e-12);
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w) + 1e-12);
    }

    #[test]
    fn continuant_identities(word in prop::collection::vec(1u32..8, 1..9), z in 0.0f64..1.0) {
        let word: Vec<f64> = word.into_iter().map(f64::from).collect();
        let c = continuants(&word).unwrap();
        let n = word.len();
        // determinant identity of the 2x2 product
        let det = c.a[n - 1] * c.b[n] - c.a[n] * c.b[n - 1];
        prop_assert_eq!(det.abs(), 1.0);
        let reverse = word.iter().fold(z, |x, &b| 1.0 / (x + b));
        let forward = word.iter().rev().fold(z, |x, &b| 1.0 / (x + b));
        prop_assert!((c.compose_reverse(z) - reverse).abs() <= 1e-12 * reverse);
        prop_assert!((c.compose_forward(z) - forward).abs() <= 1e-12 * forward);
    }

    #[test]
    fn two_step_contraction(digits in digit_set(), x in 0.0f64..=1.0, y in 0.0f64..=1.0, i in 0usize..4, j in 0usize..4) {
        let f = MapFamily::mobius(&digits).unwrap();
        let dom = f.domain();
        let (x, y) = (dom.lo + x * dom.len(), dom.lo + y * dom.len());
        let (i, j) = (i % f.len(), j % f.len());
        let kappa = f.contraction_data().unwrap().kappa;
        let comp = |t: f64| f.maps()[j].eval(f.maps()[i].eval(t));
        prop_assert!((comp(x) - comp(y)).abs() <= kappa * (x - y).abs() * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn matrix_action_matches_direct_formula(digits in digit_set(), n in 4usize..200, s in 0.1f64..1.2, seed in any::<u64>()) {
        let f = MapFamily::mobius(&digits).unwrap();
        let mesh = Mesh::uniform(f.domain().lo, f.domain().hi, n).unwrap();
        let model = ErrorModel::for_family(&f, s, mesh.h()).unwrap();
        let b = assemble_one(&f, &mesh, s, &model, Which::B).unwrap();
        let nodes = mesh.nodes();
        let w: Vec<f64> = (0..mesh.dim()).map(|k| 1.0 + ((seed.wrapping_mul(k as u64 + 1) % 1000) as f64) / 100.0).collect();
        let mut bw = vec![0.0; w.len()];
        b.matvec(&w, &mut bw);
        let h = mesh.h();
        for (k, &x) in nodes.iter().enumerate() {
            let mut direct = 0.0;
            for m in f.maps() {
                let y = m.eval(x);
                let r = (((y - nodes[0]) / h).floor() as usize).min(n - 1);
                let (xl, xr) = (nodes[r], nodes[r + 1]);
                let wi = (w[r] * (xr - y) + w[r + 1] * (y - xl)) / h;
                let err2 = model.coef_lo * (xr - y) * (y - xl);
                direct += m.weight(x).powf(s) * (1.0 - err2) * wi;
            }
            // local coordinates lose about |y|/h ulps to cancellation
            let tol = (1e-13 + 8.0 * f64::EPSILON * mesh.b() / h) * direct;
            prop_assert!((bw[k] - direct).abs() <= tol, "row {}: {} vs {}", k, bw[k], direct);
        }
    }

    #[test]
    fn enclosure_scales_with_matrix(seed in any::<u64>(), c in 0.01f64..100.0) {
        let dim = 2 + (seed % 9) as usize;
        let vals: Vec<f64> = (0..dim * dim).map(|i| ((seed.rotate_left(i as u32) % 97) as f64 + 1.0) / 50.0).collect();
        let m = SparseNonnegMatrix::from_dense(dim, &vals);
        let e = power_enclosure(&m, PowerOptions::default(), None).unwrap();
        let ec = power_enclosure(&m.scaled(c), PowerOptions::default(), None).unwrap();
        prop_assert!((ec.r_lo / (c * e.r_lo) - 1.0).abs() <= 1e-12);
        prop_assert!((ec.r_hi / (c * e.r_hi) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn collatz_wielandt_brackets_every_vector(seed in any::<u64>(), w in positive_vec(6)) {
        let vals: Vec<f64> = (0..36).map(|i| ((seed.rotate_left(i) % 11) as f64) / 7.0 + if i % 7 == 0 { 0.5 } else { 0.0 }).collect();
        let m = SparseNonnegMatrix::from_dense(6, &vals);
        let r = power_enclosure(&m, PowerOptions { tol: 1e-15, max_iter: Some(100_000), stall: 1000 }, None).unwrap();
        let (lo, hi) = collatz_wielandt(&m, &w).unwrap();
        prop_assert!(lo <= r.r_hi * (1.0 + 1e-12) && r.r_lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn assembled_entries_are_ordered(digits in digit_set(), n in 8usize..120, s in 0.1f64..1.0) {
        let f = MapFamily::mobius(&digits).unwrap();
        let mesh = Mesh::uniform(f.domain().lo, f.domain().hi, n).unwrap();
        let model = ErrorModel::for_family(&f, s, mesh.h()).unwrap();
        let t = assemble(&f, &mesh, s, &model).unwrap();
        for k in 0..mesh.dim() {
            let (cols, vals) = t.m.row(k);
            prop_assert!(cols.len() <= 2 * f.len());
            for (&c, &v) in cols.iter().zip(vals) {
                let (a, b) = (t.a.get(k, c), t.b.get(k, c));
                prop_assert!(0.0 <= a && a <= b && b <= v);
            }
        }
    }
}
