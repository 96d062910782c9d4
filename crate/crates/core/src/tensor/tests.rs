use super::*;
use crate::error::Error;

fn row(v: &[f64]) -> Matrix {
    Matrix::row_vector(v)
}

/// Central differences of `f` at `x`, h = 1e-5.
fn fd_grad(x: &Matrix, f: impl Fn(&Matrix) -> f64) -> Matrix {
    let h = 1e-5;
    let mut g = Matrix::zeros(x.rows(), x.cols());
    for i in 0..x.len() {
        let mut xp = x.clone();
        xp.data_mut()[i] += h;
        let mut xm = x.clone();
        xm.data_mut()[i] -= h;
        g.data_mut()[i] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}

fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
    assert_eq!(a.shape(), b.shape());
    for (x, y) in a.data().iter().zip(b.data()) {
        assert!((x - y).abs() / y.abs().max(1.0) < tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn matmul_identity_and_selection() {
    let tape = Tape::new();
    let i2 = tape.constant(Matrix::identity(2));
    let b = tape.constant(Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
    assert_eq!(i2.matmul(b).unwrap().value(), b.value());

    let u = tape.constant(row(&[1.0, 0.0]));
    let v = tape.constant(Matrix::from_rows(&[[2.0], [3.0]]));
    assert_eq!(u.matmul(v).unwrap().value(), Matrix::scalar(2.0));
    assert!(matches!(u.matmul(u), Err(Error::Shape { .. })));
}

#[test]
fn matmul_gradient_matches_fd() {
    let a0 = Matrix::from_rows(&[[0.3, -1.2, 0.5], [2.0, 0.1, -0.7], [1.1, 0.9, -0.4]]);
    let b0 = Matrix::from_rows(&[[1.5, 0.2, -0.3], [-0.6, 0.8, 1.9], [0.4, -1.0, 0.25]]);
    let tape = Tape::new();
    let a = tape.param(a0.clone());
    let b = tape.constant(b0.clone());
    a.matmul(b).unwrap().sum(Axis::All).backward().unwrap();
    let fd = fd_grad(&a0, |x| x.matmul(&b0).unwrap().sum());
    assert_close(&a.grad().unwrap(), &fd, 1e-6);
}

#[test]
fn elementwise_examples() {
    let tape = Tape::new();
    let x = tape.constant(row(&[-1.0, 0.0, 2.0]));
    assert_eq!(x.relu().value(), row(&[0.0, 0.0, 2.0]));
    let h = tape.constant(row(&[1.95, -0.05]));
    assert_eq!(h.max_const(0.0).value(), row(&[1.95, 0.0]));
    let p = tape.constant(row(&[3.0, 0.4]));
    assert_eq!(p.min_const(1.0).value(), row(&[1.0, 0.4]));
    assert_eq!(x.abs().value(), row(&[1.0, 0.0, 2.0]));
    assert_eq!(x.leaky_relu(0.2).value(), row(&[-0.2, 0.0, 2.0]));
}

#[test]
fn broadcasting_add_and_errors() {
    let tape = Tape::new();
    let m = tape.param(Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
    let bias = tape.param(row(&[10.0, 20.0]));
    let col = tape.param(Matrix::from_rows(&[[1.0], [2.0]]));
    let s = tape.constant(Matrix::scalar(0.5));
    let out = m.add(bias).unwrap().sub(col).unwrap().mul(s).unwrap();
    assert_eq!(out.value(), Matrix::from_rows(&[[5.0, 10.5], [5.5, 11.0]]));
    out.sum(Axis::All).backward().unwrap();
    assert_eq!(bias.grad().unwrap(), row(&[1.0, 1.0]));
    assert_eq!(col.grad().unwrap(), Matrix::from_rows(&[[-1.0], [-1.0]]));

    let bad = tape.constant(Matrix::zeros(3, 2));
    assert!(matches!(m.add(bad), Err(Error::Shape { .. })));
}

#[test]
fn kink_conventions() {
    let tape = Tape::new();
    let x = tape.param(row(&[0.0, 0.0, 1.0, 1.0]));
    let y = x
        .relu()
        .add(x.abs())
        .unwrap()
        .add(x.max_const(1.0))
        .unwrap()
        .add(x.min_const(0.0))
        .unwrap()
        .sum(Axis::All);
    y.backward().unwrap();
    // at 0: relu 0, abs 0, max(.,1) 0, min(.,0) tie -> 0
    // at 1: relu 1, abs 1, max(.,1) tie -> 0, min(.,0) 0
    assert_eq!(x.grad().unwrap(), row(&[0.0, 0.0, 2.0, 2.0]));
}

#[test]
fn reductions() {
    let tape = Tape::new();
    assert_eq!(tape.constant(row(&[1.0, 1.0])).row_max().unwrap().value(), Matrix::scalar(1.0));
    assert_eq!(tape.constant(row(&[0.4, 0.6])).row_argmax().unwrap(), vec![1]);
    assert_eq!(tape.constant(row(&[0.0, 0.0])).row_argmax().unwrap(), vec![0]);

    let m = tape.param(Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]));
    assert_eq!(m.sum(Axis::PerRow).value(), Matrix::from_rows(&[[6.0], [15.0]]));
    assert_eq!(m.mean(Axis::PerCol).unwrap().value(), row(&[2.5, 3.5, 4.5]));
    assert_eq!(m.mean(Axis::All).unwrap().item(), 3.5);

    let empty = tape.constant(Matrix::zeros(0, 3));
    assert!(matches!(empty.mean(Axis::PerCol), Err(Error::Domain(_))));
    assert_eq!(empty.sum(Axis::All).item(), 0.0);
    let no_cols = tape.constant(Matrix::zeros(2, 0));
    assert!(matches!(no_cols.row_max(), Err(Error::Domain(_))));
}

#[test]
fn row_max_gradient_goes_to_lowest_tied_index() {
    let tape = Tape::new();
    let x = tape.param(Matrix::from_rows(&[[1.0, 3.0, 3.0], [2.0, 0.0, 2.0]]));
    x.row_max().unwrap().sum(Axis::All).backward().unwrap();
    assert_eq!(
        x.grad().unwrap(),
        Matrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
    );
}

#[test]
fn l2_norm_values_and_gradient() {
    let tape = Tape::new();
    assert_eq!(tape.constant(row(&[0.0, 0.0])).l2_norm().item(), 0.0);
    assert_eq!(tape.constant(row(&[1.0, -1.0])).l2_norm().item(), 2f64.sqrt());
    let x = tape.param(row(&[3.0, 4.0]));
    let n = x.l2_norm();
    assert_eq!(n.item(), 5.0);
    n.backward().unwrap();
    assert_close(&x.grad().unwrap(), &row(&[0.6, 0.8]), 1e-15);

    let z = tape.param(row(&[0.0, 0.0]));
    z.l2_norm().backward().unwrap();
    assert_eq!(z.grad().unwrap(), row(&[0.0, 0.0]));
}

#[test]
fn backward_relu_example_and_non_scalar_error() {
    let tape = Tape::new();
    let x = tape.param(row(&[2.0, -1.0]));
    let loss = x.relu().sum(Axis::All);
    loss.backward().unwrap();
    assert_eq!(x.grad().unwrap(), row(&[1.0, 0.0]));
    assert!(matches!(x.relu().backward(), Err(Error::Shape { .. })));
}

#[test]
fn pick_and_gather_scatter_gradients() {
    let tape = Tape::new();
    let x = tape.param(Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]));
    let p = x.pick(&[1, 0]).unwrap();
    assert_eq!(p.value(), Matrix::from_rows(&[[2.0], [3.0]]));
    let g = x.gather_rows(&[0, 0, 1]).unwrap();
    p.sum(Axis::All).add(g.sum(Axis::All)).unwrap().backward().unwrap();
    assert_eq!(x.grad().unwrap(), Matrix::from_rows(&[[2.0, 3.0], [2.0, 1.0]]));
    assert!(matches!(x.pick(&[2, 0]), Err(Error::Domain(_))));
}

#[test]
fn linearity_of_gradients() {
    let x0 = Matrix::from_rows(&[[0.7, -0.2], [1.3, 0.4]]);
    let grad_of = |wa: f64, wb: f64| {
        let tape = Tape::new();
        let x = tape.param(x0.clone());
        let l1 = x.relu().sum(Axis::All);
        let l2 = x.matmul(x).unwrap().l2_norm();
        l1.scale(wa).add(l2.scale(wb)).unwrap().backward().unwrap();
        x.grad().unwrap()
    };
    let g1 = grad_of(1.0, 0.0);
    let g2 = grad_of(0.0, 1.0);
    let g = grad_of(2.0, 3.0);
    for i in 0..4 {
        let expect = 2.0 * g1.data()[i] + 3.0 * g2.data()[i];
        assert!((g.data()[i] - expect).abs() <= 1e-15 * expect.abs().max(1.0));
    }
}
