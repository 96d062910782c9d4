//! Compare tape gradients of the Crammer-Singer hinge against central differences.

use evogan::losses::cs_hinge;
use evogan::tensor::{Matrix, Tape};
use rand::Rng;

fn loss(x: &Matrix, labels: &[usize]) -> f64 {
    let tape = Tape::new();
    cs_hinge(tape.constant(x.clone()), labels).unwrap().item()
}

fn main() {
    let mut rng = evogan::rng::seeded(3);
    let (n, l) = (6, 4);
    let x = Matrix::from_vec(n, l, (0..n * l).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..l)).collect();

    let tape = Tape::new();
    let leaf = tape.leaf(x.clone(), true);
    cs_hinge(leaf, &labels).unwrap().backward().unwrap();
    let analytic = leaf.grad().unwrap();

    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..l {
            let (mut up, mut down) = (x.clone(), x.clone());
            up.set(i, j, x.get(i, j) + h);
            down.set(i, j, x.get(i, j) - h);
            let numeric = (loss(&up, &labels) - loss(&down, &labels)) / (2.0 * h);
            worst = worst.max((numeric - analytic.get(i, j)).abs());
        }
    }
    println!("max |analytic - numeric| = {worst:.2e}");
}
