use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::{DynamicsError, EventKind, Trajectory, TrajectoryEvent};
use crate::geometry::{GeometryError, PointConfiguration};
use crate::interactions::Interaction;

/// Continuous-time spatial birth-death chain: births at `x` with rate
/// `b(x, η)`, each point dies at rate one.
///
/// Births are simulated by thinning: candidates arrive at total rate
/// `b* |Λ|` with `b*` the interaction's global rate bound and are accepted with
/// probability `b(x, η) / b*`.
pub struct BirthDeathProcess<'a> {
    interaction: &'a Interaction,
    state: PointConfiguration,
    time: f64,
    rate_bound: f64,
    candidate_rate: f64,
}

impl<'a> BirthDeathProcess<'a> {
    pub fn new(initial: PointConfiguration, interaction: &'a Interaction) -> Result<Self, DynamicsError> {
        let window = *initial.window();
        interaction.check_window(&window)?;
        let rate_bound = interaction.birth_rate_upper_bound(window.dim());
        if !rate_bound.is_finite() {
            return Err(DynamicsError::UnboundedBirthRate);
        }
        Ok(Self {
            interaction,
            candidate_rate: rate_bound * window.volume(),
            state: initial,
            time: 0.0,
            rate_bound,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> &PointConfiguration {
        &self.state
    }

    pub fn into_state(self) -> PointConfiguration {
        self.state
    }

    /// Runs the chain up to time `t_stop`, reporting each accepted event.
    /// The pending exponential clock is discarded at `t_stop`, which is exact
    /// by memorylessness.
    pub fn advance_until<R: Rng + ?Sized>(
        &mut self,
        t_stop: f64,
        rng: &mut R,
        mut on_event: impl FnMut(&TrajectoryEvent),
    ) {
        let window = *self.state.window();
        loop {
            let deaths = self.state.len() as f64;
            let total = deaths + self.candidate_rate;
            let wait: f64 = Exp1.sample(rng);
            let t = self.time + wait / total;
            if t > t_stop {
                self.time = t_stop;
                return;
            }
            self.time = t;
            let u = rng.random::<f64>() * total;
            if u < deaths {
                let idx = (u as usize).min(self.state.len() - 1);
                let location = self.state.remove(idx);
                on_event(&TrajectoryEvent {
                    time: t,
                    kind: EventKind::Death,
                    location,
                });
            } else {
                let x = window.sample_uniform(rng);
                let b = self.interaction.birth_rate(&x, &self.state);
                if rng.random::<f64>() * self.rate_bound < b {
                    match self.state.insert(x) {
                        Ok(i) => {
                            let location = self.state.points()[i];
                            on_event(&TrajectoryEvent {
                                time: t,
                                kind: EventKind::Birth,
                                location,
                            });
                        }
                        // a zero-probability coordinate collision counts as a rejected candidate
                        Err(GeometryError::Collision(_)) => {}
                        Err(e) => unreachable!("uniform draw left the window: {e}"),
                    }
                }
            }
        }
    }
}

/// Simulates the birth-death chain on `[0, t_max]` and records its trajectory.
pub fn run_ctmc<R: Rng + ?Sized>(
    initial: PointConfiguration,
    interaction: &Interaction,
    t_max: f64,
    rng: &mut R,
) -> Result<Trajectory, DynamicsError> {
    let mut process = BirthDeathProcess::new(initial.clone(), interaction)?;
    let mut events = Vec::new();
    process.advance_until(t_max, rng, |e| events.push(*e));
    Ok(Trajectory {
        initial,
        events,
        t_end: t_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::RngSeed;
    use crate::geometry::Window;
    use crate::interactions::SuperstablePair;
    use crate::stats::mean_se;

    #[test]
    fn rejects_unbounded_birth_rate() {
        let w = Window::periodic(2.0, 2).unwrap();
        let i = Interaction::Superstable(SuperstablePair::with_table(0.0, 1.0, vec![-0.5]).unwrap());
        let c = PointConfiguration::new(w, 1.0).unwrap();
        assert!(matches!(
            run_ctmc(c, &i, 1.0, &mut RngSeed::new(1).rng()),
            Err(DynamicsError::UnboundedBirthRate)
        ));
    }

    #[test]
    fn same_seed_gives_identical_trajectory() {
        let w = Window::periodic(2.0, 2).unwrap();
        let i = Interaction::Pair(crate::interactions::PairPotential::strauss(1.0, 0.5).unwrap());
        let c = PointConfiguration::new(w, 0.5).unwrap();
        let dump = |seed| {
            let t = run_ctmc(c.clone(), &i, 5.0, &mut RngSeed::new(seed).rng()).unwrap();
            let mut buf = Vec::new();
            t.write_jsonl(&mut buf).unwrap();
            buf
        };
        assert_eq!(dump(3), dump(3));
        assert_ne!(dump(3), dump(4));
    }

    #[test]
    fn trajectories_replay_cleanly() {
        let w = Window::periodic(2.0, 2).unwrap();
        let i = Interaction::Pair(crate::interactions::PairPotential::strauss(2.0, 0.7).unwrap());
        let c = PointConfiguration::new(w, 0.7).unwrap();
        let mut rng = RngSeed::new(8).rng();
        let mut process = BirthDeathProcess::new(c.clone(), &i).unwrap();
        let mut events = Vec::new();
        process.advance_until(20.0, &mut rng, |e| events.push(*e));
        let traj = Trajectory {
            initial: c,
            events,
            t_end: 20.0,
        };
        let last = traj.replay().unwrap();
        let mut a: Vec<_> = last.points().iter().map(|p| (p.0[0].to_bits(), p.0[1].to_bits())).collect();
        let mut b: Vec<_> = process.state().points().iter().map(|p| (p.0[0].to_bits(), p.0[1].to_bits())).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        assert!(traj.events.windows(2).all(|w| w[0].time < w[1].time));

        let mut buf = Vec::new();
        traj.write_jsonl(&mut buf).unwrap();
        let parsed = Trajectory::read_jsonl_events(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed, traj.events);
    }

    #[test]
    fn free_dynamics_transient_mean() {
        // M/M/∞ from empty: E N_t = |Λ| (1 - e^{-t})
        let w = Window::periodic(2.0, 2).unwrap();
        let empty = PointConfiguration::new(w, 1.0).unwrap();
        let seed = RngSeed::new(21);
        let times = [0.5, 1.0, 2.0];
        let runs: Vec<Vec<usize>> = (0..2000)
            .map(|r| {
                run_ctmc(empty.clone(), &Interaction::Poisson, 2.0, &mut seed.child(r).rng())
                    .unwrap()
                    .counts_at(&times)
            })
            .collect();
        for (k, t) in times.iter().enumerate() {
            let xs: Vec<f64> = runs.iter().map(|c| c[k] as f64).collect();
            let (m, se) = mean_se(&xs);
            let expect = 16.0 * (1.0 - (-t).exp());
            assert!((m - expect).abs() < 3.0 * se, "t={t}: {m} vs {expect} ± {se}");
        }
    }
}
