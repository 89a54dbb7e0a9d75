use crossover_core::lattice::{free_eigenvalue, TridiagonalOperator};
use crossover_core::rng::CounterRng;

// Cyclic Jacobi rotations on a dense symmetric matrix.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = (if theta >= 0.0 { 1.0 } else { -1.0 }) / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn three_by_three() {
    // diag 3, 4, 5 and off-diagonal -1 has eigenvalues 4 and 4 ± √3
    let op = TridiagonalOperator::from_potential(0.0, 1.0, &[1.0, 2.0, 3.0]).unwrap();
    let ev = op.eigenvalues_bisect(0.0, 10.0, 1e-13).unwrap();
    let s3 = 3f64.sqrt();
    for (a, b) in ev.iter().zip([4.0 - s3, 4.0, 4.0 + s3]) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn gershgorin_brackets_the_spectrum() {
    let mut rng = CounterRng::new(9, 0);
    let pot: Vec<f64> = (0..200).map(|_| 50.0 * rng.next_normal()).collect();
    let op = TridiagonalOperator::from_potential(0.0, 0.1, &pot).unwrap();
    let r = 2.0 / (op.mesh() * op.mesh());
    let lo = op.diagonal().iter().copied().fold(f64::INFINITY, f64::min) - r;
    let hi = op.diagonal().iter().copied().fold(f64::NEG_INFINITY, f64::max) + r;
    assert_eq!(op.sturm_count(lo), 0);
    assert_eq!(op.sturm_count(hi), op.len());
}

#[test]
fn random_fifty_matches_dense_jacobi() {
    let mut rng = CounterRng::new(4, 1);
    let pot: Vec<f64> = (0..50).map(|_| 10.0 * rng.next_normal()).collect();
    let op = TridiagonalOperator::from_potential(0.0, 0.2, &pot).unwrap();
    let e = op.off_diagonal();
    let dense: Vec<Vec<f64>> = (0..50)
        .map(|i| (0..50).map(|j| if i == j { op.diagonal()[i] } else if i.abs_diff(j) == 1 { e } else { 0.0 }).collect())
        .collect();
    let oracle = jacobi_eigenvalues(dense);
    let ev = op.eigenvalues_bisect(-200.0, 300.0, 1e-12).unwrap();
    assert_eq!(ev.len(), 50);
    for (a, b) in ev.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn free_lattice_on_a_path_of_zero_noise() {
    let op = TridiagonalOperator::from_potential(0.5e-3, 1e-3, &vec![0.0; 999]).unwrap();
    let ev = op.eigenvalues_bisect(0.0, 1000.0, 1e-12).unwrap();
    assert_eq!(ev.len(), 10);
    for (k, l) in ev.iter().enumerate() {
        assert!((l - free_eigenvalue(k + 1, 999, 1e-3)).abs() < 1e-7);
    }
}
