//! Runtime self-checks of the structural properties of filters, channels and
//! harness. Used by the `validate` command of the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{generate_channel, training_stream, NoiseSpec};
use crate::filters::{
    l0_penalty_term, lp_penalty_term, nlmf_step, step, AlgorithmSpec, Family, FilterState,
    L0Sign, Penalty,
};
use crate::harness::{run_experiment_with, Execution, ExperimentConfig, LogBase};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, failure: Option<String>, ok_detail: String) -> CheckOutcome {
    match failure {
        None => CheckOutcome {
            name,
            passed: true,
            detail: ok_detail,
        },
        Some(detail) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|v| v.abs()).fold(f64::MIN_POSITIVE, f64::max);
    num / den
}

/// NLMS/NLMF updates do not change when `(x, y)` is scaled; LMS updates scale by `c²`.
pub fn scale_invariance(draws: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_norm = 0.0f64;
    let mut worst_lms = 0.0f64;
    for _ in 0..draws {
        let m = rng.gen_range(1..=8);
        let h = gaussian_vec(&mut rng, m);
        let x = gaussian_vec(&mut rng, m);
        let y: f64 = StandardNormal.sample(&mut rng);
        let state = FilterState {
            estimate: h.clone(),
            iteration: 0,
        };
        for c in [0.01, 1.0, 100.0] {
            let xc: Vec<f64> = x.iter().map(|v| c * v).collect();
            for family in [Family::Nlms, Family::Nlmf] {
                let spec = AlgorithmSpec::new(family, Penalty::None);
                let a = step(&state, &spec, &x, y).expect("finite draw").0;
                let b = step(&state, &spec, &xc, c * y).expect("finite draw").0;
                let da: Vec<f64> = a.estimate.iter().zip(&h).map(|(p, q)| p - q).collect();
                let db: Vec<f64> = b.estimate.iter().zip(&h).map(|(p, q)| p - q).collect();
                worst_norm = worst_norm.max(rel_diff(&db, &da));
            }
            let spec = AlgorithmSpec::new(Family::Lms, Penalty::None);
            let state0 = FilterState::zeros(m);
            let y0: f64 = h.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() + y;
            let a = step(&state0, &spec, &x, y0).expect("finite draw").0;
            let b = step(&state0, &spec, &xc, c * y0).expect("finite draw").0;
            let scaled: Vec<f64> = a.estimate.iter().map(|v| c * c * v).collect();
            worst_lms = worst_lms.max(rel_diff(&b.estimate, &scaled));
        }
    }
    let failure = (worst_norm > 1e-12 || worst_lms > 1e-10)
        .then(|| format!("normalized rel. diff {worst_norm:.3e}, LMS c² rel. diff {worst_lms:.3e}"));
    outcome(
        "joint-scale invariance",
        failure,
        format!("normalized {worst_norm:.1e}, LMS c² {worst_lms:.1e} over {draws} draws"),
    )
}

/// `0 ≤ μ_f(n) < μ_f`, `μ_f/2` at `e² = ‖x‖²`, close to `μ_f` for large errors.
pub fn nlmf_step_bounds(draws: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu_f = 1.5;
    let mut failure = None;
    for i in 0..draws {
        let xx = 10f64.powf(rng.gen_range(-6.0..6.0));
        let e2 = 10f64.powf(rng.gen_range(-8.0..12.0));
        let mu = nlmf_step(mu_f, e2, xx);
        if !(0.0..mu_f).contains(&mu) {
            failure = Some(format!("draw {i}: mu_f(n) = {mu} for e²={e2}, ‖x‖²={xx}"));
            break;
        }
        if nlmf_step(mu_f, xx, xx) != mu_f / 2.0 {
            failure = Some(format!("draw {i}: e² = ‖x‖² = {xx} does not give mu_f/2"));
            break;
        }
        if nlmf_step(mu_f, 1000.0 * xx, xx) < 0.999 * mu_f {
            failure = Some(format!("draw {i}: e² = 1000‖x‖² below 0.999 mu_f"));
            break;
        }
    }
    outcome("NLMF step bounds", failure, format!("{draws} draws"))
}

/// With no data term, the attracting L0 penalty shrinks every small tap and
/// the literal sign grows it.
pub fn l0_zero_attraction(draws: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = 5.0;
    // ρ = 1e-9: the penalty step 2βρ is far below almost every drawn tap, so
    // taps cannot overshoot zero
    let lambda = 2e-9;
    let attract = AlgorithmSpec::new(Family::Lms, Penalty::L0).with_lambda(lambda);
    let literal = attract.with_l0_sign(L0Sign::Literal);
    let zeros = [0.0];
    let mut failure = None;
    for _ in 0..draws {
        let mag = rng.gen_range(0.0..1.0 / beta);
        if mag <= 2.0 * beta * attract.rho() {
            continue;
        }
        let h = if rng.gen_bool(0.5) { mag } else { -mag };
        let state = FilterState {
            estimate: vec![h],
            iteration: 0,
        };
        let a = step(&state, &attract, &zeros, 0.0).expect("finite").0.estimate[0];
        let l = step(&state, &literal, &zeros, 0.0).expect("finite").0.estimate[0];
        if !(a.abs() < h.abs() && a * h > 0.0) || l.abs() <= h.abs() {
            failure = Some(format!("h = {h}: attracting -> {a}, literal -> {l}"));
            break;
        }
        let outside = 1.0 / beta + mag;
        let s = FilterState {
            estimate: vec![outside],
            iteration: 0,
        };
        if step(&s, &attract, &zeros, 0.0).expect("finite").0.estimate[0] != outside {
            failure = Some(format!("h = {outside} outside 1/beta moved"));
            break;
        }
    }
    outcome("L0 zero attraction", failure, format!("{draws} coordinates"))
}

/// `f(−h) = −f(h)` for both penalty gradients.
pub fn penalty_oddness(draws: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    for _ in 0..draws {
        let m = rng.gen_range(1..=16);
        let h: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let neg: Vec<f64> = h.iter().map(|v| -v).collect();
        let p = rng.gen_range(0.0..0.99);
        let pairs = [
            (
                lp_penalty_term(&h, p, 0.05).expect("valid"),
                lp_penalty_term(&neg, p, 0.05).expect("valid"),
            ),
            (
                l0_penalty_term(&h, 5.0).expect("valid"),
                l0_penalty_term(&neg, 5.0).expect("valid"),
            ),
        ];
        if pairs
            .iter()
            .any(|(a, b)| a.iter().zip(b).any(|(x, y)| *x != -*y))
        {
            failure = Some(format!("odd symmetry broken for h = {h:?}"));
            break;
        }
    }
    outcome("penalty oddness", failure, format!("{draws} vectors"))
}

/// Support size, unit norm and stacking of generated channels.
pub fn channel_structure(draws: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failure = None;
    for d in 0..draws {
        let n = rng.gen_range(1..=32);
        let t = rng.gen_range(1..=n);
        let n_t = rng.gen_range(1..=4);
        let ch = generate_channel(n, n_t, t, rng.gen()).expect("valid shape");
        let ok = ch.per_antenna.iter().zip(&ch.supports).all(|(h, s)| {
            s.len() == t
                && h.iter().filter(|v| **v != 0.0).count() == t
                && (h.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12
        }) && ch.stacked == ch.per_antenna.concat();
        if !ok {
            failure = Some(format!("draw {d} (N={n}, T={t}, Nt={n_t}) malformed"));
            break;
        }
    }
    outcome("channel structure", failure, format!("{draws} draws"))
}

/// Sample variance of `y − hᵀx` against `σ_n²`.
pub fn noise_variance(samples: usize, seed: u64) -> CheckOutcome {
    let ch = generate_channel(16, 2, 3, seed).expect("valid shape");
    let noise = NoiseSpec::from_snr(3.0, 1.0).expect("valid noise");
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for s in training_stream(&ch, &noise, samples, seed ^ 1).expect("valid stream") {
        let r = s.observation
            - ch.stacked.iter().zip(&s.regressor).map(|(h, x)| h * x).sum::<f64>();
        sum += r;
        sum2 += r * r;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = sum2 / n - mean * mean;
    let ratio = var / noise.sigma_n2;
    // 4-sigma band on the variance ratio, ±√(2/n)
    let tol = 4.0 * (2.0 / n).sqrt();
    let failure = ((ratio - 1.0).abs() > tol || mean.abs() > 4.0 * (noise.sigma_n2 / n).sqrt())
        .then(|| format!("mean {mean:.3e}, variance ratio {ratio:.4}"));
    outcome(
        "noise statistics",
        failure,
        format!("variance ratio {ratio:.4} over {samples} samples"),
    )
}

/// Sequential and parallel harness runs agree bit for bit.
pub fn parallel_determinism(trials: usize, seed: u64) -> CheckOutcome {
    let base = ExperimentConfig {
        trials,
        iterations: 200,
        t_dominant: 1,
        master_seed: seed,
        ..Default::default()
    };
    let algorithms = [Family::Nlms, Family::Nlmf]
        .into_iter()
        .flat_map(|f| Penalty::ALL.map(|p| AlgorithmSpec::new(f, p)))
        .map(|s| base.with_table1(s, LogBase::E).expect("valid table lookup"))
        .collect();
    let cfg = ExperimentConfig { algorithms, ..base };
    let seq = run_experiment_with(&cfg, Execution::Sequential);
    let par = run_experiment_with(&cfg, Execution::ParallelWith { workers: 4 });
    let failure = match (seq, par) {
        (Ok(a), Ok(b)) if a == b => None,
        (Ok(_), Ok(_)) => Some("trajectories differ".to_string()),
        (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
    };
    outcome("parallel determinism", failure, format!("{trials} trials, 1 vs 4 workers"))
}

/// Every check with its default size.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        scale_invariance(1000, seed),
        nlmf_step_bounds(100_000, seed),
        l0_zero_attraction(10_000, seed),
        penalty_oddness(1000, seed),
        channel_structure(10_000, seed),
        noise_variance(100_000, seed),
        parallel_determinism(16, seed),
    ]
}
