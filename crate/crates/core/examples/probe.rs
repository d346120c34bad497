// probe: decompose the systematic identity-evaluation error
use obstruction_lab::dual_norms::modulated_transform;
use obstruction_lab::multiplier::omega;
use obstruction_lab::obstruction::{pairing_via_second_order, processed_control};
use obstruction_lab::heat::heat_modal_solve;
use obstruction_lab::spectral::ModalField;

fn simpson(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|i| if i == 0 || i == n - 1 { h / 3.0 } else if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 }).collect()
}

fn rhs(u1: &obstruction_lab::signal::TimeSignal, zmax: f64, n: usize) -> f64 {
    let grid: Vec<f64> = (0..n).map(|j| -zmax + 2.0 * zmax * j as f64 / (n - 1) as f64).collect();
    let w = simpson(n, grid[1] - grid[0]);
    let vhat = modulated_transform(u1, 2, &grid).unwrap();
    let mut acc = 0.0;
    for ((wi, v), z) in w.iter().zip(vhat.values.iter()).zip(grid.iter()) {
        acc += wi * v.norm_sqr() * omega(2, *z).unwrap();
    }
    acc * 2.0 * std::f64::consts::PI
}

fn main() {
    for k_ctrl in [7usize, 11] {
        let u1 = processed_control(20260810, 2, 0.5, 8192, k_ctrl, 41).unwrap();
        // lhs at 1x and 4x trajectory resolution (same pl control)
        let y1a = heat_modal_solve(&u1, &ModalField::zeros(41), 41, u1.n_steps()).unwrap();
        let y1b = heat_modal_solve(&u1, &ModalField::zeros(41), 41, 4 * u1.n_steps()).unwrap();
        let la = pairing_via_second_order(&y1a, 2).unwrap();
        let lb = pairing_via_second_order(&y1b, 2).unwrap();
        let r1 = rhs(&u1, 400.0, 16001);
        let r2 = rhs(&u1, 400.0, 64001);
        println!("K={k_ctrl:2}: lhs1x={la:.10e} lhs4x={lb:.10e} (lhs shift {:.2e})", (la - lb).abs() / lb.abs());
        println!("       rhs dz=.05={r1:.10e} dz=.0125={r2:.10e} (rhs shift {:.2e})", (r1 - r2).abs() / r2.abs());
        println!("       gap(lhs4x vs rhs fine) = {:.3e}", (lb - r2).abs() / lb.abs());
    }
}
