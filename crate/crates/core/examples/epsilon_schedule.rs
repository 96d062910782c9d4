//! Print the evolving-discriminator staircase and which players update.

use evogan::engine::EvolutionSchedule;

fn main() {
    let schedule = EvolutionSchedule::default();
    let mut last = None;
    for iter in (0..40_000).step_by(1000) {
        let eps = schedule.epsilon_at(iter);
        if last != Some(eps) {
            let players = if eps < 0.0 { "disc + gen" } else { "disc only" };
            println!("iter {iter:>6}: eps = {eps:>8}  margin = {:>6}  {players}", (-eps).max(0.0));
            last = Some(eps);
        }
    }
}
