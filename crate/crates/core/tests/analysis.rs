use parasite_branching::analysis::{compute_ia, MomentFormulas};
use parasite_branching::model::JumpMeasureSpec;

/// For compactly supported π the inner integrand tends to (1−v), so x²I_a(x) → (a + 1_{a=0})·∫z²π(dz)/2.
#[test]
fn ia_has_a_quadratic_tail_for_compact_jumps() {
    let (alpha, beta, lo, hi) = (1.0, 1.5, 0.1, 2.0);
    let pi = JumpMeasureSpec::power_law(alpha, beta, lo, hi).unwrap();
    // ∫ z² α z^(−1−β) dz over [lo, hi].
    let second = alpha * (hi.powf(2.0 - beta) - lo.powf(2.0 - beta)) / (2.0 - beta);
    for a in [0.0, 0.5, 2.0] {
        let limit = if a == 0.0 { 1.0 } else { a } * second / 2.0;
        let x = 1e6;
        let got = x * x * compute_ia(a, x, &pi).unwrap();
        assert!((got - limit).abs() <= 0.01 * limit, "a = {a}: {got} vs {limit}");
    }
}

#[test]
fn exponential_jumps_have_the_same_limit() {
    let (mass, rate) = (2.0, 3.0);
    let pi = JumpMeasureSpec::exponential(mass, rate).unwrap();
    // mass·E[Z²] for Z ~ Exp(rate).
    let limit = 1.5 * mass * 2.0 / (rate * rate) / 2.0;
    let got = 1e12 * compute_ia(1.5, 1e6, &pi).unwrap();
    assert!((got - limit).abs() <= 0.01 * limit, "{got} vs {limit}");
}

/// Without death E[N_t] is nondecreasing in t, and with q the mean is smaller.
#[test]
fn mean_population_size_orders() {
    let mf = MomentFormulas::new(2.0, 1.0, 0.5, 1.0).unwrap();
    let free = mf.without_death();
    let mut prev = 1.0;
    for i in 1..=20 {
        let t = 0.1 * i as f64;
        let m = free.mean(1.0, 0.0, t);
        assert!(m >= prev);
        assert!(mf.mean(1.0, 0.0, t) < m);
        prev = m;
    }
}
