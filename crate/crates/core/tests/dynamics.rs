use gibbslab::dynamics::{run_ctmc, sample_gibbs, GibbsBoundary, GibbsSampler, PoissonSampler, Sampler};
use gibbslab::interactions::{PairPotential, SuperstablePair};
use gibbslab::stats::{chi_square_two_sample, ks_two_sample};
use gibbslab::{Interaction, PointConfiguration, Region, RngSeed, Window};

fn close_pairs(c: &PointConfiguration, r: f64) -> usize {
    let mut n = 0;
    for (i, p) in c.points().iter().enumerate() {
        c.for_each_neighbor(p, r, |j, _| {
            if j > i {
                n += 1;
            }
        });
    }
    n
}

#[test]
fn metropolis_and_birth_death_agree_for_strauss() {
    let window = Window::periodic(2.0, 2).unwrap();
    let strauss = Interaction::Pair(PairPotential::strauss(1.0, 0.5).unwrap());
    let mh: Vec<usize> = GibbsSampler::periodic(window, strauss.clone())
        .with_schedule(2000, 200)
        .with_chains(4)
        .draw(3000, RngSeed::new(11))
        .unwrap()
        .iter()
        .map(|c| c.len())
        .collect();
    let empty = PointConfiguration::new(window, strauss.cell_size()).unwrap();
    let traj = run_ctmc(empty, &strauss, 20.0 + 3000.0 * 4.0, &mut RngSeed::new(12).rng()).unwrap();
    let times: Vec<f64> = (0..3000).map(|k| 20.0 + 4.0 * k as f64).collect();
    let ctmc = traj.counts_at(&times);
    let test = chi_square_two_sample(&mh, &ctmc);
    assert!(test.p_value > 1e-3, "{test:?}");
}

#[test]
fn free_dynamics_stay_poisson() {
    let window = Window::periodic(2.0, 2).unwrap();
    let a = Region::cube(2, -1.0, 1.0);
    let fresh: Vec<f64> = PoissonSampler::new(window, 1.0)
        .draw(2000, RngSeed::new(21))
        .unwrap()
        .iter()
        .map(|c| c.count_in(&a) as f64)
        .collect();
    let evolved: Vec<f64> = PoissonSampler::new(window, 1.0)
        .draw(2000, RngSeed::new(22))
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            run_ctmc(c, &Interaction::Poisson, 1.5, &mut RngSeed::new(23).child(i as u64).rng())
                .unwrap()
                .replay()
                .unwrap()
                .count_in(&a) as f64
        })
        .collect();
    let (d, p) = ks_two_sample(&fresh, &evolved);
    assert!(p > 1e-3, "KS {d} p {p}");
}

#[test]
fn repulsion_suppresses_close_pairs() {
    let window = Window::periodic(3.0, 2).unwrap();
    let range = 0.5;
    let strauss = Interaction::Pair(PairPotential::strauss(3.0, range).unwrap());
    let samples = GibbsSampler::periodic(window, strauss)
        .with_schedule(3000, 200)
        .draw(400, RngSeed::new(31))
        .unwrap();
    let mut pairs = 0.0;
    let mut poisson_pairs = 0.0;
    for c in &samples {
        let rho = c.len() as f64 / window.volume();
        pairs += close_pairs(c, range) as f64;
        poisson_pairs += 0.5 * rho * rho * window.volume() * std::f64::consts::PI * range * range;
    }
    assert!(pairs < 0.3 * poisson_pairs, "{pairs} vs {poisson_pairs}");
}

#[test]
fn hard_core_is_never_violated() {
    let window = Window::free(2.0, 2).unwrap();
    let pair = SuperstablePair::with_table(0.3, 0.6, vec![-0.5, -0.2, 0.0]).unwrap();
    let interaction = Interaction::Superstable(pair);
    for i in 0..20 {
        let c = sample_gibbs(&window, &interaction, &GibbsBoundary::Fixed(vec![]), 2000, &mut RngSeed::new(41).child(i).rng())
            .unwrap();
        for p in c.points() {
            let mut near = 0;
            c.for_each_neighbor(p, 0.2999, |_, _| near += 1);
            // the point itself is its only neighbor within the hard core
            assert_eq!(near, 1);
        }
    }
}
