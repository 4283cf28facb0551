//! Dense linear-algebra oracles written independently of the library.

#![allow(dead_code, clippy::needless_range_loop)]

use num_complex::Complex64;

pub type Mat = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_2x2(ch: char) -> [[Complex64; 2]; 2] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match ch {
        'I' => [[o, z], [z, o]],
        'X' => [[z, o], [o, z]],
        'Y' => [[z, -i], [i, z]],
        'Z' => [[o, z], [z, -o]],
        _ => panic!("bad symbol {ch}"),
    }
}

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|r| (0..n).map(|k| if r == k { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn to_mat(m: [[Complex64; 2]; 2]) -> Mat {
    m.iter().map(|r| r.to_vec()).collect()
}

/// Full matrix of a single-qubit operator on `qubit` in an `n`-qubit register,
/// with qubit `i` as bit `i` of the basis index (so qubit 0 is the rightmost factor).
pub fn embed(op: [[Complex64; 2]; 2], qubit: usize, n: usize) -> Mat {
    let mut out = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        let f = if q == qubit { to_mat(op) } else { identity(2) };
        out = kron(&out, &f);
    }
    out
}

pub fn pauli_matrix(s: &str) -> Mat {
    let n = s.len();
    let mut out = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        out = kron(&out, &to_mat(pauli_2x2(s.as_bytes()[q] as char)));
    }
    out
}

pub fn hamiltonian_dense(terms: &[(String, f64)]) -> Mat {
    let dim = 1 << terms[0].0.len();
    let mut h = vec![vec![c(0.0, 0.0); dim]; dim];
    for (s, coef) in terms {
        let p = pauli_matrix(s);
        for i in 0..dim {
            for j in 0..dim {
                h[i][j] += p[i][j] * coef;
            }
        }
    }
    h
}

/// CX as a basis permutation: flips `target` when `control` is set.
pub fn cx_matrix(control: usize, target: usize, n: usize) -> Mat {
    let dim = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for b in 0..dim {
        let out = if b >> control & 1 == 1 { b ^ (1 << target) } else { b };
        m[out][b] = c(1.0, 0.0);
    }
    m
}

pub fn cz_matrix(a: usize, b: usize, n: usize) -> Mat {
    let dim = 1 << n;
    let mut m = identity(dim);
    for (k, row) in m.iter_mut().enumerate() {
        if k >> a & 1 == 1 && k >> b & 1 == 1 {
            row[k] = c(-1.0, 0.0);
        }
    }
    m
}

pub fn mat_vec(m: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn expectation(m: &Mat, v: &[Complex64]) -> f64 {
    let mv = mat_vec(m, v);
    v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
}

/// Smallest eigenvalue of a Hermitian matrix by cyclic Jacobi sweeps on the
/// real symmetric embedding `[[A, -B], [B, A]]`.
pub fn jacobi_min_eigenvalue(h: &Mat) -> f64 {
    let n = h.len();
    let m = 2 * n;
    let mut a = vec![vec![0.0f64; m]; m];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = h[i][j].re;
            a[i + n][j + n] = h[i][j].re;
            a[i][j + n] = -h[i][j].im;
            a[i + n][j] = h[i][j].im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

// Fixtures shared by the integration targets.

use driftskip::engine::{AnsatzKind, AnsatzSpec, Shots};
use driftskip::noise::{generate_trace, DriftTrace, NoiseConfig};
use driftskip::pauli::{parse_hamiltonian, Hamiltonian};
use driftskip::runtime::{ControllerConfig, JobEntry, RunRecord, RunSetup};
use driftskip::spsa::SpsaConfig;

pub fn heh_like() -> Hamiltonian {
    parse_hamiltonian(include_str!("../../data/heh_like.txt")).unwrap()
}

pub fn eq11() -> Hamiltonian {
    parse_hamiltonian(include_str!("../../data/eq11.txt")).unwrap()
}

pub fn quiet(horizon: usize) -> DriftTrace {
    generate_trace(&NoiseConfig::quiet(horizon)).unwrap()
}

pub fn setup(h: Hamiltonian, reps: usize, controller: ControllerConfig, trace: DriftTrace, budget: usize, seed: u64) -> RunSetup {
    let n = h.qubit_count();
    RunSetup {
        hamiltonian: h,
        ansatz: AnsatzSpec::new(AnsatzKind::Ra, n, reps),
        trace,
        controller,
        spsa: SpsaConfig { seed, ..Default::default() },
        budget,
        seed,
        initial_theta: None,
    }
}

pub fn exact(c: ControllerConfig) -> ControllerConfig {
    c.with_shots(Shots::Exact)
}

/// Detection quantities recomputed from one logged job, written out longhand:
/// returns (D, Ef, Gf, G).
pub fn recompute_detection(j: &JobEntry) -> (f64, f64, f64, f64) {
    let mut d = 0.0;
    let mut weighted = 0.0;
    for k in 0..j.weights.len() {
        d += j.weights[k] * (j.reference_energies[k] - j.recorded_energies[k]);
        weighted += j.weights[k] * j.recorded_energies[k];
    }
    let ef = j.e_prime - d;
    (d, ef, ef - weighted, j.e_prime - weighted)
}

/// Job at which each live reference was last written, replayed from the log:
/// appended on accept, all moved to the current job on a refresh.
pub fn reference_jobs(record: &RunRecord, capacity: usize) -> Vec<Vec<usize>> {
    let mut window: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for j in &record.jobs {
        out.push(window.clone());
        if j.energy.is_some() {
            window.insert(0, j.job);
            window.truncate(capacity);
        } else if j.refreshed {
            for w in window.iter_mut() {
                *w = j.job;
            }
        }
    }
    out
}
