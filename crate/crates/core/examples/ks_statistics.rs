// The statistics toolbox on degree sequences: asymptotic and
// permutation KS, chi-square homogeneity, Wilson intervals and the Hill
// tail estimate.
//
// Degrees inside one graph are dependent, so pooling them across graphs
// and feeding the asymptotic KS formula overstates the evidence. The
// permutation version only exchanges whole graphs.

use girg_lab::experiments::stats::{
    chi_square_homogeneity, hill_exponent, ks_replicate_permutation, ks_two_sample, wilson,
};
use girg_lab::{generate, Engine, GirgParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> girg_lab::Result<()> {
    let degrees = |seeds: std::ops::Range<u64>| -> girg_lab::Result<Vec<Vec<usize>>> {
        seeds
            .map(|s| Ok(generate(&GirgParams::new(500.0, 2, 2.5, 1.0)?.with_seed(s), Engine::Grid)?.degrees()))
            .collect()
    };
    let a = degrees(0..40)?;
    let b = degrees(40..80)?;
    let flat = |g: &[Vec<usize>]| g.iter().flatten().map(|&k| k as f64).collect::<Vec<f64>>();

    let (d, p) = ks_two_sample(&flat(&a), &flat(&b))?;
    println!("asymptotic KS:  D = {d:.4}, p = {p:.4}");
    let (d, p) = ks_replicate_permutation(&a, &b, 499, &mut ChaCha8Rng::seed_from_u64(1))?;
    println!("permutation KS: D = {d:.4}, p = {p:.4}");
    let chi = chi_square_homogeneity(&flat(&a), &flat(&b), 8)?;
    println!("chi-square:     X² = {:.2} on {} df, p = {:.4}", chi.statistic, chi.df, chi.p_value);

    let big = generate(&GirgParams::new(50_000.0, 2, 2.5, 1.0)?.with_seed(9), Engine::Grid)?;
    let degs: Vec<f64> = big.degrees().into_iter().map(|k| k as f64).collect();
    println!("Hill estimate of tau from the top 1%: {:.2}", hill_exponent(&degs, degs.len() / 100)?);

    let (lo, hi) = wilson(17, 20);
    println!("Wilson 95% interval for 17/20: [{lo:.3}, {hi:.3}]");
    Ok(())
}

fn main() -> girg_lab::Result<()> {
    run_example()
}
