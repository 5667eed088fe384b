// temporary probe: literal one-step Richardson defect, Brownian driver
use stablewell::grid::Field;
use stablewell::grid::Grid;
use stablewell::evolution::StrangPropagator;
use stablewell::operators::{Driver, Potential};

fn main() {
    let grid = Grid::build(10.0, 40).unwrap();
    let pot = Potential::finite_well(20.0).unwrap();
    let psi0 = Field::from_fn(grid, |x| (-x * x / 2.0).exp()).unwrap();
    let step = |dt: f64, n: usize| {
        let prop = StrangPropagator::new(grid, Driver::Brownian, pot, dt).unwrap();
        let mut p = psi0.clone();
        for _ in 0..n { p = prop.step(&p).unwrap(); }
        p
    };
    let mut defects = Vec::new();
    for dt in [0.2, 0.1, 0.05, 0.025] {
        let one = step(dt, 1);
        let two = step(dt / 2.0, 2);
        let defect = one.l2_distance(&two).unwrap();
        defects.push(defect);
        println!("dt={dt}: one-step defect={defect:.4e}");
    }
    for w in defects.windows(2) {
        println!("reduction {:.2}", w[0] / w[1]);
    }
}
