//! The unified hinge reproduces both unlabeled losses depending on epsilon.

use evogan::losses::{semisup_hinge, unified_hinge, universum_hinge, UnifiedLayout};
use evogan::tensor::{Matrix, Tape};

fn main() -> evogan::Result<()> {
    let scores = Matrix::from_rows(&[[1.0, 0.0, 0.2], [0.3, 0.32, 0.31], [-1.0, 2.5, 0.0]]);
    let (m, l) = scores.shape();

    for delta in [0.05, 0.5] {
        let tape = Tape::new();
        let s = tape.constant(scores.clone());
        let layout = UnifiedLayout::new(m, l, -delta)?;
        let unified = unified_hinge(layout.expand_scores(s)?, &layout)?.item();
        let universum = universum_hinge(s, delta)?.item();
        println!("eps = {:<5} unified {unified:.6}  universum {universum:.6}", -delta);
    }

    let tape = Tape::new();
    let s = tape.constant(scores);
    let layout = UnifiedLayout::new(m, l, 1.0)?;
    let unified = unified_hinge(layout.expand_scores(s)?, &layout)?.item();
    let semisup = semisup_hinge(s)?.item();
    let offset = (m * (l - 1)) as f64;
    println!("eps = 1     unified {unified:.6}  semisup + m(L-1) {:.6}", semisup + offset);
    Ok(())
}
